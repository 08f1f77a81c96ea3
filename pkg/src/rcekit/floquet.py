"""Periodic coefficients: DC averages of the dynamic eigenvalues, monodromy,
characteristic multipliers and periodicity verdicts."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import chordal, cumulative_hermite, fd_derivative, hermite_interp, integrate_gauss
from .odeengine import RceTrajectory, integrate_state
from .primitive import PrimitivePair
from .reduction import ReducedRCE, ScalarSystem, StateMatrix2x2, companion

PERIODIC_TOL = 1e-4
COEFF_TOL = 1e-9
N_PERIODS = 6


class FloquetError(ValueError):
    pass


@dataclass
class Verdict:
    periodic: bool
    deviation: float
    detail: dict = field(default_factory=dict)


@dataclass
class FloquetResult:
    T: float
    r1: complex
    r2: complex
    monodromy: np.ndarray
    multipliers: np.ndarray
    Q_periodic: Optional[Verdict]
    rce_periodic: Optional[Verdict]
    route: str = "dc"
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def c(z):
            z = complex(z)
            return [z.real, z.imag]
        return {
            "T": self.T, "r1": c(self.r1), "r2": c(self.r2), "route": self.route,
            "monodromy": np.asarray(self.monodromy, dtype=float).tolist(),
            "multipliers": [c(m) for m in self.multipliers],
            "Q_periodic": None if self.Q_periodic is None else vars(self.Q_periodic),
            "rce_periodic": None if self.rce_periodic is None else vars(self.rce_periodic),
            "checks": self.checks,
        }


def _sorted(t, *arrays):
    if t[-1] >= t[0]:
        return (t,) + arrays
    return (t[::-1],) + tuple(a[::-1] for a in arrays)


def dc_average(f, T: float, t=None, df=None, end: Optional[float] = None):
    """(1/T) times the integral of f over one period.

    ``f`` is either a vectorized callable (integrated over [end - T, end],
    ``end`` defaults to T) or samples on the grid ``t``; sampled input uses the
    last complete period of the grid and slopes ``df`` (finite differences if
    omitted).
    """
    if T <= 0:
        raise FloquetError("period must be positive")
    if callable(f):
        b = T if end is None else end
        return integrate_gauss(lambda s: np.asarray(f(s)) * np.ones_like(s), b - T, b, 64) / T
    t = np.asarray(t, dtype=float)
    f = np.asarray(f)
    df = fd_derivative(t, f) if df is None else np.asarray(df)
    t, f, df = _sorted(t, f, df)
    b = t[-1] if end is None else end
    if b - T < t[0] - 1e-12 * (1 + abs(t[0])) or b > t[-1] + 1e-12 * (1 + abs(t[-1])):
        raise FloquetError(f"window [{t[0]}, {t[-1]}] is shorter than one period ending at {b}")
    F = cumulative_hermite(t, f, df)
    Fb = hermite_interp(t, F, f, b)
    Fa = hermite_interp(t, F, f, max(b - T, t[0]))
    return (Fb - Fa) / T


def _state_of(sys) -> StateMatrix2x2:
    if isinstance(sys, StateMatrix2x2):
        return sys
    if isinstance(sys, ScalarSystem):
        return companion(sys)
    raise TypeError("expected a StateMatrix2x2 or ScalarSystem")


def check_coefficients_periodic(r: ReducedRCE, T: float, t0: float = 0.0,
                                samples: int = 64, tol: float = COEFF_TOL) -> float:
    """Sampled check that every state-matrix entry and w01, w02 repeat after T."""
    s = t0 + np.linspace(0.0, T, samples, endpoint=False)
    worst = 0.0
    for c in r.state.entries() + (r.omega01, r.omega02):
        a = np.asarray(c(s)) * np.ones_like(s)
        b = np.asarray(c(s + T)) * np.ones_like(s)
        worst = max(worst, float(np.max(np.abs(a - b) / (1.0 + np.abs(a)))))
    if worst > tol:
        raise FloquetError(f"coefficients are not {T}-periodic (deviation {worst:.3g})")
    return worst


def _shifted(t, v, dv, T):
    """Samples in the last complete period and their values one period earlier."""
    t, v, dv = _sorted(np.asarray(t, float), np.asarray(v), np.asarray(dv))
    if t[-1] - t[0] < T * (1 - 1e-12):
        raise FloquetError("window shorter than one period")
    lo = t[-1] - T
    sel = t >= lo - 1e-12 * (1 + abs(lo))
    tq = t[sel] - T
    tq = np.maximum(tq, t[0])
    return v[sel], hermite_interp(t, v, dv, tq), t[sel]


def check_rce_periodicity(obj, T: float, t=None, tol: float = PERIODIC_TOL,
                          min_periods: float = 3.0) -> Verdict:
    """Sup-norm of nu(t) - nu(t - T) over the last full period.

    ``obj`` is an RceTrajectory, a FamilySolution, or sampled values on ``t``.
    Values are compared through the chordal (arctan) chart so escape samples
    do not dominate; escape events are compared by their offsets modulo T.
    """
    events = []
    if isinstance(obj, RceTrajectory):
        t = obj.t
        v = obj.values.real
        events = list(obj.event_times())
    elif hasattr(obj, "values") and hasattr(obj, "pair"):
        t = obj.pair.t
        v = np.asarray(obj.values()).real
        events = list(obj.escape_times())
    else:
        v = np.asarray(obj, dtype=float)
        t = np.asarray(t, dtype=float)
    span = abs(t[-1] - t[0])
    if span < min_periods * T * (1 - 1e-9):
        return Verdict(False, math.inf, {"reason": "window shorter than the required periods"})
    th = np.arctan(v)
    finite = np.isfinite(v)
    # the unwrapped chart value is smooth through poles
    th_c = np.unwrap(2.0 * np.where(finite, th, np.pi / 2)) / 2.0
    dth = fd_derivative(t, th_c)
    now, before, ts = _shifted(t, th_c, dth, T)
    dev_val = float(np.max(chordal(np.tan(now), np.tan(before))))
    detail = {"value_deviation": dev_val}
    dev_ev = 0.0
    if events:
        ev = np.sort(np.asarray(events))
        tail = ev[ev >= max(t[0], t[-1]) - 2 * T]
        if len(tail) >= 2:
            gaps = np.diff(tail)
            dev_ev = float(np.max(np.abs(np.abs(gaps - T * np.round(gaps / T))))) / T
        detail["events_last_two_periods"] = tail.tolist()
        detail["event_offsets"] = (np.mod(tail - min(t[0], t[-1]), T)).tolist()
        detail["event_deviation"] = dev_ev
    dev = max(dev_val, dev_ev)
    return Verdict(bool(dev <= tol), dev, detail)


def _period_index(t, T):
    t_end = float(max(t[0], t[-1]))
    return t_end - T, t_end


def floquet_exponents(sys, r: ReducedRCE, pair: PrimitivePair, T: float,
                      tol: float = 1e-12, periodic_tol: float = PERIODIC_TOL) -> FloquetResult:
    """DC-average exponents from the primitive pair, cross-checked against the
    monodromy of direct state integration over the last complete period."""
    t = pair.t
    t_lo = float(min(t[0], t[-1]))
    check_coefficients_periodic(r, T, t_lo)
    m = _state_of(sys)
    a, b = _period_index(t, T)
    if a < t_lo - 1e-12 * (1 + abs(t_lo)):
        raise FloquetError("window shorter than one period")
    M = integrate_state(m, np.array([a, b]), tol=tol)[-1]
    mu = np.linalg.eigvals(M)
    trA = m.trace()
    abel = math.exp(integrate_gauss(lambda s: trA(s) * np.ones_like(s), a, b, 64))
    checks = {"det_monodromy": float(np.linalg.det(M)), "abel": abel,
              "product_error": float(abs(np.linalg.det(M) - abel) / abs(abel))}

    w01 = r.omega01(t) * np.ones_like(t)
    s0 = r.sigma0(t) * np.ones_like(t)
    ds0 = r.sigma0.d(t) * np.ones_like(t)
    dw01 = r.omega01.d(t) * np.ones_like(t)
    route = "dc"
    Qv = None
    rcev = None
    if not pair.has_poles:
        base = s0 + w01 * pair.nuR
        dbase = ds0 + dw01 * pair.nuR + w01 * pair.dnuR
        intr = w01 * pair.nuI
        dintr = dw01 * pair.nuI + w01 * pair.dnuI
        dc_b = dc_average(base, T, t, dbase)
        dc_i = dc_average(intr, T, t, dintr)
        if pair.kind == "real":
            r1, r2 = complex(dc_b + dc_i), complex(dc_b - dc_i)
        else:
            r1, r2 = complex(dc_b, dc_i), complex(dc_b, -dc_i)
        checks["dc_nuR"] = float(dc_average(pair.nuR, T, t, pair.dnuR))
        checks["dc_intrinsic"] = float(dc_i)
        checks["scale_nuR"] = float(np.max(np.abs(pair.nuR)) + np.max(np.abs(pair.nuI)))
        Qv = _q_periodicity(r, pair, T, r1, r2, periodic_tol)
        if pair.kind == "real":
            rcev = check_rce_periodicity(pair.plus, T, t, periodic_tol, min_periods=1.0)
        else:
            rcev = _pair_periodicity(pair, T, periodic_tol)
    else:
        route = "monodromy"
        order = np.argsort(-np.abs(mu))
        r1, r2 = (cmath.log(complex(mu[i])) / T for i in order)
        rcev = check_rce_periodicity(pair.plus.real, T, t, periodic_tol, min_periods=1.0)
    # cross-check moduli, then the phase convention
    pred = np.array([cmath.exp(r1 * T), cmath.exp(r2 * T)])
    used = set()
    mod_err = 0.0
    phase_diff = []
    for p in pred:
        j = min((k for k in range(2) if k not in used), key=lambda k: abs(mu[k] - p))
        used.add(j)
        mod_err = max(mod_err, abs(abs(mu[j]) - abs(p)) / max(abs(p), 1e-300))
        d = (cmath.phase(mu[j]) - cmath.phase(p)) % (2 * math.pi)
        phase_diff.append(min(d, 2 * math.pi - d))
    checks["modulus_error"] = float(mod_err)
    checks["phase_difference"] = [float(x) for x in phase_diff]
    # negative real multipliers carry the +/- j pi/T augmentation in log(mu)/T
    checks["pi_over_T_shift"] = bool(any(abs(x - math.pi) < 1e-3 for x in phase_diff)
                                     or any(abs(m.imag) <= 1e-12 * abs(m) and m.real < 0
                                            for m in np.asarray(mu, dtype=complex)))
    checks["raw_exponents"] = [[z.real, z.imag] for z in
                               (cmath.log(complex(x)) / T for x in mu)]
    return FloquetResult(T, r1, r2, M, mu, Qv, rcev, route, checks)


def _pair_periodicity(pair: PrimitivePair, T: float, tol: float) -> Verdict:
    """Both components of a pole-free pair compared one period apart."""
    devs = []
    for v, dv in ((pair.nuR, pair.dnuR), (pair.nuI, pair.dnuI)):
        now, before, _ = _shifted(pair.t, v, dv, T)
        devs.append(float(np.max(np.abs(now - before)) / max(1.0, np.max(np.abs(now)))))
    d = max(devs)
    return Verdict(bool(d <= tol), d, {"nuR": devs[0], "nuI": devs[1]})


def _q_periodicity(r: ReducedRCE, pair: PrimitivePair, T: float, r1: complex, r2: complex,
                   tol: float) -> Verdict:
    """Q(t) = V(t) diag(e^{p1}, e^{p2}) with p_i = int(lambda_i - r_i), W = I."""
    t = pair.t
    w01 = r.omega01(t) * np.ones_like(t)
    s0 = r.sigma0(t) * np.ones_like(t)
    j = 1.0 if pair.kind == "real" else 1j
    nu1, nu2 = pair.nuR + j * pair.nuI, pair.nuR - j * pair.nuI
    al = r.alpha(t) * np.ones_like(t)
    ds0 = r.sigma0.d(t) * np.ones_like(t)
    dw01 = r.omega01.d(t) * np.ones_like(t)
    out = 0.0
    for nu, dnu, rr in ((nu1, pair.dnuR + j * pair.dnuI, r1),
                        (nu2, pair.dnuR - j * pair.dnuI, r2)):
        lam = s0 + w01 * nu - rr
        dlam = ds0 + dw01 * nu + w01 * dnu
        p = cumulative_hermite(t, lam, dlam)
        col0 = np.exp(p)
        col1 = (nu - al) * col0
        for c in (col0, col1):
            dc = fd_derivative(t, c)
            now, before, _ = _shifted(t, c, dc, T)
            dev = float(np.max(np.abs(now - before)) / max(1e-300, np.max(np.abs(now))))
            out = max(out, dev)
    return Verdict(bool(out <= tol), out)
