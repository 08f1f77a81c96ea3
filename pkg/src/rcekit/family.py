"""The one-parameter continuum of solutions generated by a primitive pair.

Real kind:       nu = nu_R + nu_I * {tanh | coth}(phi_f - K)
Imaginary kind:  nu = nu_R + nu_Im * {-tan | cot}(phi_fm - K)

with phi_f the integral of w01*nu_I, fixed to zero at a base time.  K is
stored relative to that base time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import cumulative_hermite, fd_derivative, hermite_interp, stencil_mask
from .primitive import PrimitivePair
from .reduction import ReducedRCE

REAL_BRANCHES = ("tanh", "coth")
IMAG_BRANCHES = ("tan", "cot")
PRIMITIVE_BRANCHES = ("primitive_plus", "primitive_minus")
SEPARATRIX_TOL = 1e-12


class FamilyError(ValueError):
    pass


@dataclass
class PhaseAccumulator:
    """phi_f = integral of w01*nu_I (nu_Im for the imaginary kind), zero at base_time."""

    t: np.ndarray
    phi_f: np.ndarray
    omega_f: np.ndarray
    base_time: float
    kind: str

    def __call__(self, tq):
        return hermite_interp(self.t, self.phi_f, self.omega_f, tq)

    def rebase(self, base_time: float) -> "PhaseAccumulator":
        shift = self(base_time)
        return PhaseAccumulator(self.t, self.phi_f - shift, self.omega_f, float(base_time),
                                self.kind)


def phase_accumulator(r: ReducedRCE, pair: PrimitivePair,
                      base_time: Optional[float] = None) -> PhaseAccumulator:
    """Cumulative phase of the pair, zero at ``base_time`` (default: first sample)."""
    t = pair.t
    if pair.has_poles:
        raise FamilyError("the intrinsic component is not positive and finite on the grid; "
                          "the phase is undefined")
    w01 = r.omega01(t) * np.ones_like(t)
    omega_f = w01 * pair.nuI
    # quadrature keeps relative accuracy where nu_I is tiny, which the
    # integrator's absolute phase tolerance does not
    dw01 = r.omega01.d(t) * np.ones_like(t)
    phi = cumulative_hermite(t, omega_f, dw01 * pair.nuI + w01 * pair.dnuI)
    acc = PhaseAccumulator(t, phi, omega_f, float(t[0]), pair.kind)
    if base_time is not None and base_time != t[0]:
        acc = acc.rebase(base_time)
    return acc


@dataclass
class FamilySolution:
    pair: PrimitivePair
    branch: str
    K: float
    phi: PhaseAccumulator

    def __post_init__(self):
        allowed = (REAL_BRANCHES if self.pair.kind == "real" else IMAG_BRANCHES) \
            + PRIMITIVE_BRANCHES
        if self.branch not in allowed:
            raise FamilyError(f"branch {self.branch!r} does not apply to a {self.pair.kind} pair")

    @property
    def kind(self) -> str:
        return self.pair.kind

    @property
    def C(self) -> float:
        """Polynomial-case constant: e^{2K} (tanh) or -e^{2K} (coth)."""
        if self.branch == "tanh":
            return math.exp(2.0 * self.K)
        if self.branch == "coth":
            return -math.exp(2.0 * self.K)
        raise FamilyError("C is defined for the tanh and coth branches only")

    @property
    def K0(self) -> float:
        """Constant of the e^{-2 phi} form: e^{-2K} (tanh) or -e^{-2K} (coth)."""
        if self.branch == "tanh":
            return math.exp(-2.0 * self.K)
        if self.branch == "coth":
            return -math.exp(-2.0 * self.K)
        raise FamilyError("K0 is defined for the tanh and coth branches only")

    def values(self) -> np.ndarray:
        return family_eval(self, self.phi, self.pair.t)

    def derivative(self, r: ReducedRCE) -> np.ndarray:
        """Exact time derivative on the grid (from the RCE)."""
        v = self.values()
        return r.rhs(self.pair.t, v)

    def escape_times(self) -> np.ndarray:
        return branch_poles(self)

    def rebase(self, base_time: float) -> "FamilySolution":
        """Same member expressed with a new phase base: K shifts by phi(new base)."""
        shift = float(self.phi(base_time))
        return FamilySolution(self.pair, self.branch, self.K - shift, self.phi.rebase(base_time))


def _branch_parts(f: FamilySolution, tq):
    p = f.pair
    if np.ndim(tq) == 1 and len(tq) == len(p.t) and np.array_equal(tq, p.t):
        return p.nuR, p.nuI, f.phi.phi_f
    nuR = hermite_interp(p.t, p.nuR, p.dnuR, tq)
    nuI = hermite_interp(p.t, p.nuI, p.dnuI, tq)
    return nuR, nuI, f.phi(tq)


def branch_function(branch: str, x):
    """The branch function of phi - K; poles give +/-inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch == "tanh":
            return np.tanh(x)
        if branch == "coth":
            return 1.0 / np.tanh(x)
        if branch == "tan":
            return -np.tan(x)
        if branch == "cot":
            return np.cos(x) / np.sin(x)
    raise FamilyError(f"unknown branch {branch!r}")


def family_eval(f: FamilySolution, phi: PhaseAccumulator, t):
    """Value of the family member at time(s) ``t`` within the pair's window."""
    if phi is not f.phi:
        f = FamilySolution(f.pair, f.branch, f.K, phi)
    nuR, nuI, ph = _branch_parts(f, t)
    if f.branch == "primitive_plus":
        return nuR + (nuI if f.kind == "real" else 1j * nuI)
    if f.branch == "primitive_minus":
        return nuR - (nuI if f.kind == "real" else 1j * nuI)
    return nuR + nuI * branch_function(f.branch, ph - f.K)


def fit_branch_and_K(pair: PrimitivePair, phi: PhaseAccumulator, ic_value: float,
                     ic_time: float) -> FamilySolution:
    """The unique member through ``ic_value`` at ``ic_time``."""
    nuR = float(hermite_interp(pair.t, pair.nuR, pair.dnuR, ic_time))
    nuI = float(hermite_interp(pair.t, pair.nuI, pair.dnuI, ic_time))
    ph = float(phi(ic_time))
    ic_value = float(ic_value)
    if pair.kind == "real":
        if math.isinf(ic_value):
            return FamilySolution(pair, "coth", ph, phi)
        u = (ic_value - nuR) / nuI
        if abs(abs(u) - 1.0) <= SEPARATRIX_TOL:
            return FamilySolution(pair, "primitive_plus" if u > 0 else "primitive_minus",
                                  math.inf, phi)
        if abs(u) < 1.0:
            return FamilySolution(pair, "tanh", ph - math.atanh(u), phi)
        return FamilySolution(pair, "coth", ph - math.atanh(1.0 / u), phi)
    if math.isinf(ic_value):
        return FamilySolution(pair, "cot", ph, phi)
    u = (ic_value - nuR) / nuI
    arccot = 0.5 * math.pi - math.atan(u)
    return FamilySolution(pair, "cot", ph - arccot, phi)


def fit_to_samples(pair: PrimitivePair, phi: PhaseAccumulator, values) -> FamilySolution:
    """Member through a sampled solution on the pair's grid, fitted at the
    best-conditioned sample: K moves by du / |1 - u^2|, so samples where the
    solution hugs the attractor or separatrix (|u| near 1) or a pole are avoided."""
    from .primitive import pole_mask
    v = np.asarray(values, dtype=float)
    with np.errstate(all="ignore"):
        u = (v - pair.nuR) / pair.nuI
        score = np.abs(1.0 - u * u) / (1.0 + u * u)
    score[pole_mask(pair.t, v) | ~np.isfinite(score)] = -1.0
    i = int(np.argmax(score))
    if score[i] < 0:
        raise FamilyError("no usable sample to fit the member")
    return fit_branch_and_K(pair, phi, float(v[i]), float(pair.t[i]))


def branch_poles(f: FamilySolution) -> np.ndarray:
    """Times where the member escapes (poles of coth/cot, zeros of tan's cosine)."""
    ph = f.phi.phi_f
    t = f.pair.t
    if f.branch in ("tanh",) + PRIMITIVE_BRANCHES:
        return np.array([])
    if f.branch == "coth":
        targets = [f.K]
    else:
        offset = 0.0 if f.branch == "cot" else 0.5 * math.pi
        lo, hi = min(ph[0], ph[-1]), max(ph[0], ph[-1])
        m0 = math.ceil((lo - f.K - offset) / math.pi)
        m1 = math.floor((hi - f.K - offset) / math.pi)
        targets = [f.K + offset + m * math.pi for m in range(m0, m1 + 1)]
    out = []
    for target in targets:
        x = ph - target
        idx = np.nonzero(np.sign(x[:-1]) != np.sign(x[1:]))[0]
        exact = np.nonzero(x == 0)[0]
        if exact.size:
            out.append(float(t[exact[0]]))
            continue
        if not idx.size:
            continue
        i = int(idx[0])
        # Newton on the Hermite interpolant of the phase
        a, b = t[i], t[i + 1]
        tc = a + (b - a) * x[i] / (x[i] - x[i + 1])
        for _ in range(50):
            val = float(f.phi(tc)) - target
            slope = float(hermite_interp(t, f.phi.omega_f, np.gradient(f.phi.omega_f, t), tc))
            step = val / slope if slope else 0.0
            tc = min(max(tc - step, min(a, b)), max(a, b))
            if abs(step) < 1e-15 * (1.0 + abs(tc)):
                break
        out.append(tc)
    return np.sort(np.array(out))


def k0_form(pair: PrimitivePair, phi: PhaseAccumulator, K0: float) -> np.ndarray:
    """nu_R - nu_I (e^{-2 phi} - K0)/(e^{-2 phi} + K0), evaluated on the grid."""
    e = np.exp(-2.0 * phi.phi_f)
    with np.errstate(divide="ignore", invalid="ignore"):
        return pair.nuR - pair.nuI * (e - K0) / (e + K0)


def general_pair(r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator, K: float):
    """The complementary pair (tanh, coth) with common K as its own primitive pair:
    returns (nu_Rx, nu_Ix) with nu_Ix = nu_I (tanh - coth)/2 and nu_Rx = -nu_Ix'/(2 w01 nu_Ix)."""
    x = phi.phi_f - K
    th = np.tanh(x)
    with np.errstate(divide="ignore"):
        cth = 1.0 / th
        csch2 = 1.0 / np.sinh(x) ** 2
    sech2 = 1.0 / np.cosh(x) ** 2
    w01 = r.omega01(pair.t) * np.ones_like(pair.t)
    nuIx = 0.5 * pair.nuI * (th - cth)
    dnuIx = 0.5 * pair.dnuI * (th - cth) + 0.5 * pair.nuI * phi.omega_f * (sech2 + csch2)
    nuRx = -dnuIx / (2.0 * w01 * nuIx)
    return nuRx, nuIx


@dataclass
class GeneralZSolution:
    family: FamilySolution
    eta: object

    def values(self) -> np.ndarray:
        t = self.family.pair.t
        return self.eta(t) + self.family.values()


def general_z_solution(r: ReducedRCE, f: FamilySolution,
                       phi: Optional[PhaseAccumulator] = None) -> GeneralZSolution:
    if phi is not None and phi is not f.phi:
        f = FamilySolution(f.pair, f.branch, f.K, phi)
    return GeneralZSolution(f, r.eta)


def riccati_residual(g, t, z, pole_guard: float = 1e3) -> np.ndarray:
    """Normalized residual of z' = s2 z^2 + s1 z + s0 by finite differences."""
    from .primitive import pole_mask
    z = np.asarray(z, dtype=float)
    bad = pole_mask(t, z, pole_guard)
    safe = np.where(bad, 0.0, z)
    dz = fd_derivative(t, safe)
    rhs = g.s2(t) * safe ** 2 + g.s1(t) * safe + g.s0(t)
    res = np.abs(dz - rhs) / (1.0 + safe ** 2)
    near = stencil_mask(bad)
    res[near] = np.nan
    return res
