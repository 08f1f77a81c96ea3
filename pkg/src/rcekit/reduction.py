"""Reduction of the three input forms to the canonical characteristic equation

    nu' = -w01(t) nu^2 + w02(t),        z = nu + eta,

plus the constant-coefficient baseline.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coeffexpr import CoefficientFn, array_function, as_coefficient

DEFAULT_SAMPLES = 1024


class ReductionError(ValueError):
    """A reduction precondition failed (vanishing s2/a12, sign-changing w01, ...)."""


@dataclass(frozen=True)
class GeneralRiccati:
    """z' = s2 z^2 + s1 z + s0."""

    s2: CoefficientFn
    s1: CoefficientFn
    s0: CoefficientFn

    def __post_init__(self):
        for name in ("s2", "s1", "s0"):
            object.__setattr__(self, name, as_coefficient(getattr(self, name)))


@dataclass(frozen=True)
class ScalarSystem:
    """y'' + r1 y' + r0 y = 0."""

    r1: CoefficientFn
    r0: CoefficientFn

    def __post_init__(self):
        object.__setattr__(self, "r1", as_coefficient(self.r1))
        object.__setattr__(self, "r0", as_coefficient(self.r0))

    @property
    def singular_points(self):
        return tuple(sorted(set(self.r1.singular_points) | set(self.r0.singular_points)))


@dataclass(frozen=True)
class StateMatrix2x2:
    """x' = A(t) x with A = [[a11, a12], [a21, a22]]."""

    a11: CoefficientFn
    a12: CoefficientFn
    a21: CoefficientFn
    a22: CoefficientFn

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            object.__setattr__(self, name, as_coefficient(getattr(self, name)))

    def entries(self):
        return (self.a11, self.a12, self.a21, self.a22)

    def trace(self) -> CoefficientFn:
        return self.a11 + self.a22

    def matrix(self, t) -> np.ndarray:
        """A(t) evaluated at a scalar time, or stacked (..., 2, 2) for arrays."""
        vals = [np.broadcast_to(np.asarray(c(t), dtype=float), np.shape(t)) for c in self.entries()]
        return np.stack([np.stack(vals[:2], -1), np.stack(vals[2:], -1)], -2)

    @property
    def singular_points(self):
        pts = set()
        for c in self.entries():
            pts |= set(c.singular_points)
        return tuple(sorted(pts))


def companion(s: ScalarSystem) -> StateMatrix2x2:
    """State matrix [[0, 1], [-r0, -r1]] of the scalar system."""
    return StateMatrix2x2(as_coefficient(0.0), as_coefficient(1.0), -s.r0, -s.r1)


@dataclass(frozen=True)
class ReducedRCE:
    """Canonical pair (w01, w02) with shift eta, offset alpha and sigma0 = w01*eta.

    ``state`` is an equivalent state matrix whose first component y = x1 has
    dynamic eigenvalue y'/y = sigma0 + w01*nu; ``scalar`` is the second-order
    equation satisfied by that y.
    """

    omega01: CoefficientFn
    omega02: CoefficientFn
    eta: CoefficientFn
    alpha: CoefficientFn
    sigma0: CoefficientFn
    state: StateMatrix2x2
    scalar: ScalarSystem
    form: str = "riccati"
    period: Optional[float] = None
    singular_points: tuple = field(default=())

    def rhs(self, t, nu):
        return -self.omega01(t) * nu * nu + self.omega02(t)

    def residual(self, t, nu, dnu):
        """Normalized residual |nu' - rhs| / (1 + |nu|^2)."""
        return np.abs(dnu - self.rhs(t, nu)) / (1.0 + np.abs(nu) ** 2)

    def with_period(self, T: Optional[float]) -> "ReducedRCE":
        return ReducedRCE(self.omega01, self.omega02, self.eta, self.alpha, self.sigma0,
                          self.state, self.scalar, self.form, T, self.singular_points)

    def is_autonomous(self) -> bool:
        return self.omega01.is_constant() and self.omega02.is_constant()


@dataclass(frozen=True)
class LtiPair:
    """Characteristic pair lambda_R +/- lambda_I of a lambda^2 + b lambda + c."""

    lambdaR: float
    lambdaI: float
    is_real: bool
    degenerate: bool
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0

    def roots(self) -> tuple[complex, complex]:
        """Both roots, computed without cancellation."""
        a, b, c = self.a, self.b, self.c
        d = b * b - 4.0 * a * c
        if d >= 0.0:
            q = -0.5 * (b + math.copysign(math.sqrt(d), b))
            if q == 0.0:
                return (0j, 0j)
            r1, r2 = q / a, c / q
            return (complex(max(r1, r2)), complex(min(r1, r2)))
        s = cmath.sqrt(d)
        return ((-b + s) / (2 * a), (-b - s) / (2 * a))

    @property
    def nu_pair(self) -> tuple[complex, complex]:
        """Primitive RCE solutions nu_R +/- nu_I for w01 = 1 (lambda_R plays eta)."""
        i = self.lambdaI if self.is_real else 1j * self.lambdaI
        return (i, -i)


# --------------------------------------------------------------------------


def _sample(cf: CoefficientFn, window, samples):
    lo, hi = window
    ts = np.linspace(lo, hi, samples)
    with np.errstate(all="ignore"):
        v = np.asarray(array_function(cf.value)(ts), dtype=float)
    return v[np.isfinite(v)]


def _check_nonvanishing(cf: CoefficientFn, name: str, window, samples):
    if cf.is_constant():
        if cf.value.value == 0.0:
            raise ReductionError(f"{name} vanishes identically")
        return
    if window is None:
        return
    v = _sample(cf, window, samples)
    if v.size == 0:
        raise ReductionError(f"{name} undefined on the window")
    if np.any(v == 0.0) or (v.min() < 0.0 < v.max()):
        raise ReductionError(f"{name} vanishes inside the window {tuple(window)}")


def _check_positive(cf: CoefficientFn, window, samples):
    if cf.is_constant():
        if cf.value.value <= 0.0:
            raise ReductionError("omega01 must be positive (sign-changing or negative "
                                 "omega01 systems are excluded)")
        return
    if window is None:
        return
    v = _sample(cf, window, samples)
    if v.size and v.min() <= 0.0:
        raise ReductionError("omega01 is not positive on the window")


def _finish(omega01, omega02, eta, alpha, state, scalar, form, window, samples, sing):
    _check_positive(omega01, window, samples)
    sigma0 = omega01 * eta
    pts = set(sing)
    for c in (omega01, omega02, eta, alpha, sigma0):
        pts |= set(c.singular_points)
    return ReducedRCE(omega01, omega02, eta, alpha, sigma0, state, scalar, form,
                      None, tuple(sorted(pts)))


def reduce_general_riccati(g: GeneralRiccati, window=None,
                           samples: int = DEFAULT_SAMPLES) -> ReducedRCE:
    """w01 = -s2, eta = -s1/(2 s2), w02 = s0 - s2 eta^2 - eta'."""
    _check_nonvanishing(g.s2, "s2", window, samples)
    omega01 = -g.s2
    eta = -g.s1 / (g.s2 * 2.0)
    omega02 = g.s0 - g.s2 * eta * eta - eta.deriv_fn()
    alpha = -eta
    # x' = [[0, -s2], [s0, s1]] x has x2/x1 = z
    state = StateMatrix2x2(as_coefficient(0.0), -g.s2, g.s0, g.s1)
    scalar = ScalarSystem(-(g.s1 + g.s2.deriv_fn() / g.s2), g.s2 * g.s0)
    sing = set(g.s2.singular_points) | set(g.s1.singular_points) | set(g.s0.singular_points)
    return _finish(omega01, omega02, eta, alpha, state, scalar, "riccati", window, samples, sing)


def scalar_system_to_rce(s: ScalarSystem, window=None,
                         samples: int = DEFAULT_SAMPLES) -> ReducedRCE:
    """w01 = 1, eta = -r1/2, alpha = r1/2, w02 = r1'/2 + r1^2/4 - r0."""
    one = as_coefficient(1.0)
    eta = -s.r1 / 2.0
    alpha = s.r1 / 2.0
    omega02 = s.r1.deriv_fn() / 2.0 + s.r1 * s.r1 / 4.0 - s.r0
    return _finish(one, omega02, eta, alpha, companion(s), s, "second_order", window,
                   samples, s.singular_points)


def state_matrix_to_rce(m: StateMatrix2x2, window=None,
                        samples: int = DEFAULT_SAMPLES) -> ReducedRCE:
    """w01 = a12, eta = (a11+a22)/(2 a12), alpha = (a11-a22)/(2 a12),
    w02 = alpha' + a12 alpha^2 + a21."""
    _check_nonvanishing(m.a12, "a12", window, samples)
    omega01 = m.a12
    eta = (m.a11 + m.a22) / (m.a12 * 2.0)
    alpha = (m.a11 - m.a22) / (m.a12 * 2.0)
    omega02 = alpha.deriv_fn() + m.a12 * alpha * alpha + m.a21
    da12 = m.a12.deriv_fn()
    r1 = -(m.a11 + m.a22 + da12 / m.a12)
    r0 = m.a11 * m.a22 - m.a12 * m.a21 + m.a11 * da12 / m.a12 - m.a11.deriv_fn()
    return _finish(omega01, omega02, eta, alpha, m, ScalarSystem(r1, r0), "state_matrix",
                   window, samples, m.singular_points)


def reduce(system, window=None, samples: int = DEFAULT_SAMPLES) -> ReducedRCE:
    """Dispatch on the input form."""
    if isinstance(system, GeneralRiccati):
        return reduce_general_riccati(system, window, samples)
    if isinstance(system, ScalarSystem):
        return scalar_system_to_rce(system, window, samples)
    if isinstance(system, StateMatrix2x2):
        return state_matrix_to_rce(system, window, samples)
    raise TypeError(f"cannot reduce {type(system).__name__}")


def lti_characteristic_pair(a: float, b: float, c: float) -> LtiPair:
    """lambda_R = -b/2a, lambda_I^2 = b^2/4a^2 - c/a."""
    if a == 0.0:
        raise ReductionError("leading coefficient a must be nonzero")
    lam_r = -b / (2.0 * a)
    rad = b * b / (4.0 * a * a) - c / a
    scale = b * b / (4.0 * a * a) + abs(c / a)
    degenerate = abs(rad) <= 1e-14 * scale or rad == 0.0
    if degenerate:
        return LtiPair(lam_r, 0.0, True, True, a, b, c)
    return LtiPair(lam_r, math.sqrt(abs(rad)), rad > 0.0, False, a, b, c)
