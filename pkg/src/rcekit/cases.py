"""Builders for the worked systems and the independent oracles used to check them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coeffexpr import CoefficientFn, parse_expression
from .reduction import GeneralRiccati, ScalarSystem

SERIES_MAX_TERMS = 200


class CaseError(ValueError):
    pass


def _fn(src: str, singular=()) -> CoefficientFn:
    c = CoefficientFn.from_expr(parse_expression(src))
    if singular:
        pts = tuple(sorted(set(c.singular_points) | set(singular)))
        c = CoefficientFn(c.value, c.derivative, c.domain, pts)
    return c


def make_bessel(N: int) -> ScalarSystem:
    """t^2 y'' + t y' + (t^2 - N^2) y = 0 as y'' + (1/t) y' + (1 - N^2/t^2) y = 0."""
    if int(N) != N or N < 1:
        raise CaseError("Bessel order N must be a positive integer")
    N = int(N)
    return ScalarSystem(_fn("1/t", (0.0,)), _fn(f"1-{N * N}/t^2", (0.0,)))


def make_qho(N: int) -> ScalarSystem:
    """y'' + (N - t^2) y = 0 with N odd (bound states)."""
    if int(N) != N or N < 1 or int(N) % 2 == 0:
        raise CaseError("oscillator parameter N must be an odd positive integer")
    return ScalarSystem(_fn("0"), _fn(f"{int(N)}-t^2"))


def make_mathieu(a0: float, q: float) -> ScalarSystem:
    """y'' + (-(a0 + q cos t)) y = 0, so that w02 = a0 + q cos t."""
    a0, q = float(a0), float(q)
    if q == 0.0:
        return ScalarSystem(_fn("0"), _fn(repr(-a0)))
    return ScalarSystem(_fn("0"), _fn(f"-({a0!r}+{q!r}*cos(t))"))


def make_polynomial_case() -> GeneralRiccati:
    """z' = -z^2 + 2/t^2, with known solutions -1/t and 2/t."""
    return GeneralRiccati(_fn("-1"), _fn("0"), _fn("2/t^2", (0.0,)))


def make_constant_case(w02: float = 4.0) -> GeneralRiccati:
    """z' = -z^2 + w02 (the constant-coefficient example)."""
    return GeneralRiccati(_fn("-1"), _fn("0"), _fn(repr(float(w02))))


def polynomial_closed_form(t, C: float):
    """(2t^3 - C) / (t (t^3 + C))."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return (2.0 * t ** 3 - C) / (t * (t ** 3 + C))


def polynomial_known_solutions(t):
    t = np.asarray(t, dtype=float)
    return -1.0 / t, 2.0 / t


# --------------------------------------------------------------------------
# oracles


def oracle_bessel_first_kind(N: int, t) -> np.ndarray:
    """J_N(t) by its power series, stopped when a term drops below 1e-16 of the sum."""
    if N < 0 or int(N) != N:
        raise CaseError("order must be a nonnegative integer")
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise CaseError("series oracle requires t >= 0")
    out = np.empty_like(ts)
    for i, x in enumerate(ts):
        out[i] = _bessel_series(int(N), float(x))
    return out[0] if scalar else out


def _bessel_series(N: int, x: float) -> float:
    half = 0.5 * x
    if x == 0.0:
        return 1.0 if N == 0 else 0.0
    term = half ** N / math.factorial(N)
    terms = [term]
    x2 = half * half
    for k in range(1, SERIES_MAX_TERMS):
        term *= -x2 / (k * (k + N))
        terms.append(term)
        if abs(term) < 1e-16 * abs(math.fsum(terms)):
            return math.fsum(terms)
    raise CaseError(f"Bessel series not converged within {SERIES_MAX_TERMS} terms at t={x}")


def bessel_zeros(N: int, t_max: float, step: float = 0.05, tol: float = 1e-13) -> np.ndarray:
    """Positive zeros of the series oracle below ``t_max`` by scan and bisection."""
    grid = np.arange(step, t_max + step, step)
    vals = oracle_bessel_first_kind(N, grid)
    out = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = grid[i], grid[i + 1]
        fa = vals[i]
        while b - a > tol * (1 + b):
            m = 0.5 * (a + b)
            fm = _bessel_series(N, m)
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        out.append(0.5 * (a + b))
    return np.array(out)


def hermite_polynomial(k: int, t) -> np.ndarray:
    """Physicists' H_k by H_{k+1} = 2t H_k - 2k H_{k-1}."""
    t = np.asarray(t, dtype=float)
    h0 = np.ones_like(t)
    if k == 0:
        return h0
    h1 = 2.0 * t
    for j in range(1, k):
        h0, h1 = h1, 2.0 * t * h1 - 2.0 * j * h0
    return h1


def oracle_hermite_wavefunction(k: int, t) -> np.ndarray:
    """H_k(t) e^{-t^2/2}; solves y'' + (2k+1 - t^2) y = 0."""
    if k < 0 or int(k) != k:
        raise CaseError("k must be a nonnegative integer")
    t = np.asarray(t, dtype=float)
    return hermite_polynomial(int(k), t) * np.exp(-0.5 * t * t)


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class CaseSpec:
    name: str
    params: dict = field(default_factory=dict)
    window: tuple = (0.0, 1.0)
    expected_kind: str = "attractor_separatrix"
    period: Optional[float] = None
    bounded: bool = True

    def build(self):
        return CASES[self.name][0](**self.params)


def _bessel_spec(N=5):
    return CaseSpec("bessel", {"N": N}, (0.01, 30.0), "repetitive_escape", None, False)


def _qho_spec(N=5):
    return CaseSpec("qho", {"N": N}, (-5.0, 5.0), "repetitive_escape")


def _mathieu_spec(a0=1.0, q=1.0):
    kind = "repetitive_escape" if (a0 + abs(q) < 0) else "attractor_separatrix"
    if q == 0.0:
        kind = "attractor_separatrix" if a0 > 0 else "repetitive_escape"
    return CaseSpec("mathieu", {"a0": a0, "q": q}, (0.0, 12.0 * math.pi), kind,
                    None if q == 0.0 else 2.0 * math.pi)


def _polynomial_spec():
    return CaseSpec("polynomial", {}, (1.0, 20.0))


def _constant_spec(w02=4.0):
    kind = "attractor_separatrix" if w02 > 0 else "repetitive_escape"
    return CaseSpec("constant", {"w02": w02}, (0.0, 10.0), kind)


CASES: dict[str, tuple[Callable, Callable]] = {
    "bessel": (make_bessel, _bessel_spec),
    "qho": (make_qho, _qho_spec),
    "mathieu": (make_mathieu, _mathieu_spec),
    "polynomial": (lambda: make_polynomial_case(), _polynomial_spec),
    "constant": (make_constant_case, _constant_spec),
}


def case_spec(name: str, **params) -> CaseSpec:
    """Spec for a named case; the expected kind for Mathieu is a coarse guess
    only (the measured label comes from the portrait)."""
    if name not in CASES:
        raise CaseError(f"unknown case {name!r}; choose from {sorted(CASES)}")
    spec = CASES[name][1](**params)
    spec.build()   # validates parameters
    return spec


def build_case(name: str, **params):
    spec = case_spec(name, **params)
    return spec.build(), spec
