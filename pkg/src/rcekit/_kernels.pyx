# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernel.

Same stepper, systems and result layout as ``_kernels_py``; coefficients are
evaluated from stack programs produced by ``coeffexpr.compile_program``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, log, sqrt, pow, fabs, hypot, isfinite, NAN, INFINITY

cnp.import_array()

DEF MAXSTACK = 64
DEF MAXPROG = 4

SYS_RCE, SYS_POLAR, SYS_LIN2 = 0, 1, 2
DIMS = {0: 2, 1: 3, 2: 4}
OK, UNDERFLOW, NONFINITE, MAX_STEPS, NO_RETURN = 0, 1, 2, 3, 4

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784
cdef double A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40
cdef double SAFETY = 0.9, FAC_MIN = 0.2, FAC_MAX = 5.0
cdef double BETA = 0.04
cdef double EXPO1 = 0.2 - 0.04 * 0.75


cdef struct Coeffs:
    int nprog
    int* code
    double* consts
    int code_off[MAXPROG]
    int code_len[MAXPROG]
    int const_off[MAXPROG]


cdef double run_program(const int* code, int n, const double* consts, double t) nogil:
    cdef double stack[MAXSTACK]
    cdef int sp = 0, i = 0, op, k
    cdef double a, b, p
    while i < n:
        op = code[i]
        i += 1
        if op == 0:
            stack[sp] = consts[code[i]]
            i += 1
            sp += 1
        elif op == 1:
            stack[sp] = t
            sp += 1
        elif op == 2:
            stack[sp - 1] = -stack[sp - 1]
        elif op == 3:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == 4:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == 5:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == 6:
            a = stack[sp - 1]
            stack[sp - 1] = log(a) if a > 0 else NAN
        elif op == 7:
            a = stack[sp - 1]
            stack[sp - 1] = sqrt(a) if a >= 0 else NAN
        elif op >= 8 and op <= 11:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == 8:
                stack[sp - 1] = a + b
            elif op == 9:
                stack[sp - 1] = a - b
            elif op == 10:
                stack[sp - 1] = a * b
            else:
                stack[sp - 1] = a / b if b != 0 else NAN
        elif op == 12:
            p = consts[code[i]]
            i += 1
            a = stack[sp - 1]
            if a == 0 and p < 0:
                stack[sp - 1] = NAN
            else:
                stack[sp - 1] = pow(a, p)
        elif op == 13:
            p = consts[code[i]]
            i += 1
            a = stack[sp - 1]
            stack[sp - 1] = pow(a, p) if a > 0 else NAN
    return stack[0]


cdef inline double coef(Coeffs* c, int j, double t) nogil:
    return run_program(c.code + c.code_off[j], c.code_len[j], c.consts + c.const_off[j], t)


cdef void rhs(int system, Coeffs* c, double t, double* y, int mode, double* out) nogil:
    cdef double p, q, a, b, m, b11, b12, b21, b22
    if system == 0:
        p = coef(c, 0, t)
        q = coef(c, 1, t)
        a = y[0]
        b = y[1]
        if mode == 0:
            out[0] = -p * (a * a - b * b) + q
            out[1] = -2.0 * p * a * b
        else:
            out[0] = p - q * (a * a - b * b)
            out[1] = -2.0 * q * a * b
    elif system == 1:
        p = coef(c, 0, t)
        q = coef(c, 1, t)
        m = exp(y[1]) if y[1] < 700.0 else INFINITY
        out[0] = -p * (y[0] * y[0] - m * m) + q
        out[1] = -2.0 * p * y[0]
        out[2] = p * m
    else:
        b11 = coef(c, 0, t)
        b12 = coef(c, 1, t)
        b21 = coef(c, 2, t)
        b22 = coef(c, 3, t)
        out[0] = b11 * y[0] + b12 * y[2]
        out[1] = b11 * y[1] + b12 * y[3]
        out[2] = b21 * y[0] + b22 * y[2]
        out[3] = b21 * y[1] + b22 * y[3]


cdef void dopri_step(int system, Coeffs* c, int n, double t, double* y, double h,
                     double* k1, int mode, double* ynew, double* err, double* k7) nogil:
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double tmp[4]
    cdef int i
    for i in range(n):
        tmp[i] = y[i] + h * A21 * k1[i]
    rhs(system, c, t + C2 * h, tmp, mode, k2)
    for i in range(n):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    rhs(system, c, t + C3 * h, tmp, mode, k3)
    for i in range(n):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    rhs(system, c, t + C4 * h, tmp, mode, k4)
    for i in range(n):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    rhs(system, c, t + C5 * h, tmp, mode, k5)
    for i in range(n):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i]
                             + A65 * k5[i])
    rhs(system, c, t + h, tmp, mode, k6)
    for i in range(n):
        ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i]
                              + A76 * k6[i])
    rhs(system, c, t + h, ynew, mode, k7)
    for i in range(n):
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                      + E7 * k7[i])


cdef double err_norm(int n, double* y, double* ynew, double* err, double rtol,
                     double atol) nogil:
    cdef double e = 0.0, sc, v
    cdef int i
    for i in range(n):
        sc = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(ynew[i]) else fabs(ynew[i]))
        v = fabs(err[i]) / sc
        if not (v <= e):
            e = v
    return e


cdef bint all_finite(int n, double* v) nogil:
    cdef int i
    for i in range(n):
        if not isfinite(v[i]):
            return False
    return True


cdef double refine(int system, Coeffs* c, int n, double ta, double* ya, double h,
                   double* k1, int mode) nogil:
    cdef double lo = 0.0, hi = h, mid
    cdef double ym[4]
    cdef double e[4]
    cdef double k7[4]
    cdef bint sa = ya[0] < 0.0
    cdef double tol = 1e-10 * (1.0 + fabs(ta))
    while fabs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        dopri_step(system, c, n, ta, ya, mid, k1, mode, ym, e, k7)
        if (ym[0] < 0.0) == sa:
            lo = mid
        else:
            hi = mid
    return ta + 0.5 * (lo + hi)


def integrate(int system, programs, funcs, t_out, y0, int mode0=0, double rtol=1e-9,
              double atol=1e-12, double cap=1e6, double h0=0.0, long max_steps=1000000,
              double hmax=0.0):
    """See ``_kernels_py.integrate``; ``funcs`` is unused here."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts = np.ascontiguousarray(t_out, dtype=np.float64)
    cdef int n_out = ts.shape[0]
    cdef int dim = DIMS[system]
    cdef int nprog = len(programs)
    if nprog > MAXPROG:
        raise ValueError("too many coefficient programs")
    codes = [np.asarray(p[0], dtype=np.int32) for p in programs]
    cvals = [np.asarray(p[1], dtype=np.float64) for p in programs]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] code_all = np.ascontiguousarray(
        np.concatenate(codes) if codes else np.zeros(0, np.int32), dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] const_all = np.ascontiguousarray(
        np.concatenate(cvals + [np.zeros(1)]), dtype=np.float64)
    cdef Coeffs co
    cdef int j, off = 0, coff = 0
    co.nprog = nprog
    co.code = <int*> code_all.data if code_all.shape[0] else NULL
    co.consts = <double*> const_all.data
    for j in range(nprog):
        co.code_off[j] = off
        co.code_len[j] = codes[j].shape[0]
        co.const_off[j] = coff
        off += codes[j].shape[0]
        coff += cvals[j].shape[0]

    values_np = np.full((n_out, dim), np.nan)
    modes_np = np.zeros(n_out, dtype=np.int8)
    cdef double[:, ::1] values = values_np
    cdef signed char[::1] modes = modes_np
    events = []
    switches = []

    cdef double y[4]
    cdef double ynew[4]
    cdef double err[4]
    cdef double k1[4]
    cdef double k7[4]
    cdef int i
    for i in range(dim):
        y[i] = float(y0[i])
    cdef int mode = mode0
    cdef double t = ts[0]
    for i in range(dim):
        values[0, i] = y[i]
    modes[0] = mode
    result = dict(values=values_np, modes=modes_np, events=events, switches=switches,
                  status=OK, status_t=t, n_done=1, n_steps=0, n_rejected=0)
    if n_out == 1:
        return result

    cdef double direction = 1.0 if ts[n_out - 1] > t else -1.0
    cdef double span = fabs(ts[n_out - 1] - t)
    if hmax <= 0.0:
        hmax = span
    cdef bint real_track = system == 0 and y[1] == 0.0

    rhs(system, &co, t, y, mode, k1)
    if not all_finite(dim, k1):
        result.update(status=NONFINITE, status_t=t)
        return result
    cdef double h, d0, d1
    if h0 > 0.0:
        h = h0
    else:
        d0 = 1e-300
        d1 = 1e-300
        for i in range(dim):
            d0 = max(d0, fabs(y[i]))
            d1 = max(d1, fabs(k1[i]))
        h = 0.01 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
        h = min(h, 0.01 * span, hmax)
    h = max(h, 1e-12 * (1.0 + fabs(t)))

    cdef double err_old = 1e-4, target, remaining, hstep, hs, en, fac, tnew, dd, mag, wd
    cdef int idx = 1, status = OK, sign
    cdef long n_steps = 0, n_rejected = 0
    cdef bint landing, heading, crossed = True
    cdef double deadline = NAN

    while idx < n_out:
        if n_steps >= max_steps:
            status = MAX_STEPS
            break
        target = ts[idx]
        remaining = fabs(target - t)
        hstep = h if h < remaining else remaining
        landing = hstep >= remaining * (1.0 - 1e-12)
        if landing:
            hstep = remaining
        if hstep < 1e-14 * (1.0 + fabs(t)) and not landing:
            status = UNDERFLOW
            break
        hs = direction * hstep
        dopri_step(system, &co, dim, t, y, hs, k1, mode, ynew, err, k7)
        en = err_norm(dim, y, ynew, err, rtol, atol)
        n_steps += 1
        if not isfinite(en):
            if not all_finite(dim, k1) or hstep < 1e-14 * (1.0 + fabs(t)):
                status = NONFINITE
                break
            h = hstep * FAC_MIN
            n_rejected += 1
            if h < 1e-14 * (1.0 + fabs(t)):
                status = UNDERFLOW
                break
            continue
        if en > 1.0:
            fac = SAFETY * pow(en, -EXPO1)
            if fac < FAC_MIN:
                fac = FAC_MIN
            h = hstep * fac
            n_rejected += 1
            if h < 1e-14 * (1.0 + fabs(t)):
                status = UNDERFLOW
                break
            continue
        fac = SAFETY * (pow(en, -EXPO1) if en > 0.0 else 1e6) * pow(err_old, BETA)
        fac = FAC_MAX if fac > FAC_MAX else (FAC_MIN if fac < FAC_MIN else fac)
        err_old = en if en > 1e-4 else 1e-4
        tnew = target if landing else t + hs
        if real_track and mode == 1 and ((y[0] < 0.0) != (ynew[0] < 0.0)) \
                and ynew[0] != 0.0 and y[0] != 0.0:
            sign = 1 if ynew[0] > y[0] else -1
            events.append((refine(system, &co, dim, t, y, hs, k1, mode), sign))
            crossed = True
        elif real_track and mode == 1 and ynew[0] == 0.0:
            sign = 1 if k7[0] * direction > 0 else -1
            events.append((tnew, sign))
            crossed = True
        t = tnew
        for i in range(dim):
            y[i] = ynew[i]
            k1[i] = k7[i]
        if landing:
            h = max(h, hstep * fac)
        else:
            h = hstep * fac
        if h > hmax:
            h = hmax
        if landing:
            for i in range(dim):
                values[idx, i] = y[i]
            modes[idx] = mode
            idx += 1
        if system == 0:
            if mode == 0 and hypot(y[0], y[1]) > cap:
                dd = y[0] * y[0] + y[1] * y[1]
                y[0] = y[0] / dd
                y[1] = -y[1] / dd
                mode = 1
                switches.append((t, 1))
                rhs(system, &co, t, y, mode, k1)
                crossed = False
                wd = k1[0]
                heading = y[0] * wd * direction < 0.0
                if heading:
                    deadline = t + direction * 10.0 * max(hstep, fabs(y[0] / wd) if wd != 0 else 0.0)
                else:
                    deadline = NAN
            elif mode == 1:
                mag = hypot(y[0], y[1])
                if mag > 2.0 / cap:
                    dd = mag * mag
                    y[0] = y[0] / dd
                    y[1] = -y[1] / dd
                    mode = 0
                    switches.append((t, 0))
                    rhs(system, &co, t, y, mode, k1)
                    deadline = NAN
                elif (not crossed) and isfinite(deadline) and (t - deadline) * direction > 0:
                    status = NO_RETURN
                    break
    result.update(status=status, status_t=t, n_done=idx, n_steps=n_steps,
                  n_rejected=n_rejected)
    return result
