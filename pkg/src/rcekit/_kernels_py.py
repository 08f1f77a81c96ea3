"""Pure-Python integration kernel (fallback for the compiled ``_kernels``).

Both modules implement the same Dormand-Prince 5(4) stepper with PI step
control and the same systems:

``SYS_RCE``
    nu' = -w01 nu^2 + w02 as two real components.  Mode 1 integrates the
    reciprocal w = 1/nu, w' = w01 - w02 w^2, and real trajectories report
    a pole each time w changes sign.
``SYS_POLAR``
    complex RCE solution in log-polar form (nuR, ln nuIm, phase).
``SYS_LIN2``
    Phi' = A(t) Phi for a 2x2 matrix state stored row-major.

Coefficients reach the Python kernel as float callables; the compiled kernel
evaluates stack programs instead.
"""

from __future__ import annotations

import math

import numpy as np

SYS_RCE, SYS_POLAR, SYS_LIN2 = 0, 1, 2
DIMS = {SYS_RCE: 2, SYS_POLAR: 3, SYS_LIN2: 4}

OK, UNDERFLOW, NONFINITE, MAX_STEPS, NO_RETURN = 0, 1, 2, 3, 4

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY, FAC_MIN, FAC_MAX = 0.9, 0.2, 5.0
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75


def _safe(fn):
    def wrapped(t):
        try:
            return fn(t)
        except (ZeroDivisionError, ValueError, OverflowError):
            return math.nan
    return wrapped


def _make_rhs(system, funcs):
    f = [_safe(fn) for fn in funcs]
    if system == SYS_RCE:
        w01, w02 = f

        def rhs(t, y, mode):
            a, b = y
            p, q = w01(t), w02(t)
            if mode == 0:
                return [-p * (a * a - b * b) + q, -2.0 * p * a * b]
            return [p - q * (a * a - b * b), -2.0 * q * a * b]
        return rhs
    if system == SYS_POLAR:
        w01, w02 = f

        def rhs(t, y, mode):
            nr, ell, _ = y
            p, q = w01(t), w02(t)
            m = math.exp(ell) if ell < 700.0 else math.inf
            return [-p * (nr * nr - m * m) + q, -2.0 * p * nr, p * m]
        return rhs
    if system == SYS_LIN2:
        a11, a12, a21, a22 = f

        def rhs(t, y, mode):
            p11, p12, p21, p22 = y
            b11, b12, b21, b22 = a11(t), a12(t), a21(t), a22(t)
            return [b11 * p11 + b12 * p21, b11 * p12 + b12 * p22,
                    b21 * p11 + b22 * p21, b21 * p12 + b22 * p22]
        return rhs
    raise ValueError(f"unknown system {system}")


def _step(rhs, t, y, h, k1, mode):
    n = len(y)
    r = range(n)
    k2 = rhs(t + C2 * h, [y[i] + h * A21 * k1[i] for i in r], mode)
    k3 = rhs(t + C3 * h, [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in r], mode)
    k4 = rhs(t + C4 * h, [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in r], mode)
    k5 = rhs(t + C5 * h, [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i]) for i in r], mode)
    k6 = rhs(t + h, [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                 + A64 * k4[i] + A65 * k5[i]) for i in r], mode)
    ynew = [y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                        + A76 * k6[i]) for i in r]
    k7 = rhs(t + h, ynew, mode)
    err = [h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                + E7 * k7[i]) for i in r]
    return ynew, err, k7


def _err_norm(y, ynew, err, rtol, atol):
    e = 0.0
    for i in range(len(y)):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        v = abs(err[i]) / sc
        if not v <= e:  # also catches nan
            e = v
    return e


def _finite(v):
    for x in v:
        if not math.isfinite(x):
            return False
    return True


def integrate(system, programs, funcs, t_out, y0, mode0=0, rtol=1e-9, atol=1e-12,
              cap=1e6, h0=0.0, max_steps=1_000_000, hmax=0.0):
    """Integrate from ``t_out[0]`` through every time in ``t_out``.

    ``programs`` is unused here (the compiled kernel's coefficient form).
    Returns a dict with ``values`` (n_out x dim), ``modes``, ``events``
    ((t, crossing direction) pairs), ``switches`` ((t, new mode) pairs),
    ``status``, ``status_t``, ``n_done``, ``n_steps``, ``n_rejected``.
    """
    del programs
    t_out = np.asarray(t_out, dtype=float)
    n_out = t_out.shape[0]
    dim = DIMS[system]
    values = np.full((n_out, dim), np.nan)
    modes = np.zeros(n_out, dtype=np.int8)
    events: list[tuple[float, int]] = []
    switches: list[tuple[float, int]] = []
    rhs = _make_rhs(system, funcs)
    y = [float(v) for v in y0]
    mode = int(mode0)
    t = float(t_out[0])
    values[0] = y
    modes[0] = mode
    result = dict(values=values, modes=modes, events=events, switches=switches,
                  status=OK, status_t=t, n_done=1, n_steps=0, n_rejected=0)
    if n_out == 1:
        return result
    direction = 1.0 if t_out[-1] > t else -1.0
    span = abs(float(t_out[-1]) - t)
    if hmax <= 0.0:
        hmax = span
    real_track = system == SYS_RCE and y[1] == 0.0

    k1 = rhs(t, y, mode)
    if not _finite(k1):
        result.update(status=NONFINITE, status_t=t)
        return result
    if h0 > 0.0:
        h = h0
    else:
        d0 = max(abs(v) for v in y) + 1e-300
        d1 = max(abs(v) for v in k1) + 1e-300
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, 0.01 * span, hmax)
    h = max(h, 1e-12 * (1.0 + abs(t)))
    err_old = 1e-4
    idx = 1
    n_steps = n_rejected = 0
    # blow-up watchdog for reciprocal intervals
    deadline = math.nan
    crossed = True

    while idx < n_out:
        if n_steps >= max_steps:
            result.update(status=MAX_STEPS, status_t=t)
            break
        target = float(t_out[idx])
        remaining = abs(target - t)
        hstep = min(h, remaining)
        landing = hstep >= remaining * (1.0 - 1e-12)
        if landing:
            hstep = remaining
        if hstep < 1e-14 * (1.0 + abs(t)) and not landing:
            result.update(status=UNDERFLOW, status_t=t)
            break
        hs = direction * hstep
        ynew, err, k7 = _step(rhs, t, y, hs, k1, mode)
        en = _err_norm(y, ynew, err, rtol, atol)
        n_steps += 1
        if not math.isfinite(en):
            if not _finite(k1) or hstep < 1e-14 * (1.0 + abs(t)):
                result.update(status=NONFINITE, status_t=t)
                break
            h = hstep * FAC_MIN
            n_rejected += 1
            if h < 1e-14 * (1.0 + abs(t)):
                result.update(status=UNDERFLOW, status_t=t)
                break
            continue
        if en > 1.0:
            fac = max(FAC_MIN, SAFETY * en ** (-EXPO1))
            h = hstep * fac
            n_rejected += 1
            if h < 1e-14 * (1.0 + abs(t)):
                result.update(status=UNDERFLOW, status_t=t)
                break
            continue
        # accepted
        fac = SAFETY * (en ** -EXPO1 if en > 0.0 else 1e6) * err_old ** BETA
        fac = min(FAC_MAX, max(FAC_MIN, fac))
        err_old = max(en, 1e-4)
        tnew = target if landing else t + hs
        if real_track and mode == 1 and (y[0] < 0.0) != (ynew[0] < 0.0) and ynew[0] != 0.0 \
                and y[0] != 0.0:
            events.append((_refine(rhs, t, y, hs, k1, mode), 1 if ynew[0] > y[0] else -1))
            crossed = True
        elif real_track and mode == 1 and ynew[0] == 0.0:
            events.append((tnew, 1 if k7[0] * direction > 0 else -1))
            crossed = True
        t, y, k1 = tnew, ynew, k7
        h_next = min(hstep * fac if not landing else max(h, hstep * fac), hmax)
        h = h_next
        if landing:
            values[idx] = y
            modes[idx] = mode
            idx += 1
            result["n_done"] = idx
        # variable switching
        if system == SYS_RCE:
            if mode == 0 and math.hypot(y[0], y[1]) > cap:
                d = y[0] * y[0] + y[1] * y[1]
                y = [y[0] / d, -y[1] / d]
                mode = 1
                switches.append((t, 1))
                k1 = rhs(t, y, mode)
                crossed = False
                wd = k1[0]
                heading = y[0] * wd * direction < 0.0
                deadline = t + direction * 10.0 * max(hstep, abs(y[0] / wd) if wd else 0.0) \
                    if heading else math.nan
                if landing:
                    pass  # the stored sample keeps the direct value
            elif mode == 1:
                mag = math.hypot(y[0], y[1])
                if mag > 2.0 / cap:
                    d = mag * mag
                    y = [y[0] / d, -y[1] / d]
                    mode = 0
                    switches.append((t, 0))
                    k1 = rhs(t, y, mode)
                    deadline = math.nan
                elif not crossed and math.isfinite(deadline) and (t - deadline) * direction > 0:
                    result.update(status=NO_RETURN, status_t=t)
                    break
    result.update(n_steps=n_steps, n_rejected=n_rejected)
    if result["status"] == OK:
        result["status_t"] = t
    return result


def _refine(rhs, ta, ya, h, k1, mode):
    """Bisect the sign change of w[0] inside a step of size ``h`` from ``ta``."""
    lo, hi = 0.0, h
    sa = ya[0] < 0.0
    tol = 1e-10 * (1.0 + abs(ta))
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        ym, _, _ = _step(rhs, ta, ya, mid, k1, mode)
        if (ym[0] < 0.0) == sa:
            lo = mid
        else:
            hi = mid
    return ta + 0.5 * (lo + hi)
