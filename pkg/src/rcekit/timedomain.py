"""Dynamic eigenvalues, time-domain reconstruction y = A g f(phi - K) and the
fundamental matrix built from two RCE solutions.

The reconstructed y is the first state component x1 of the equivalent state
matrix (the companion form for a second-order input), which need not be the
variable one actually wants for a general state-space model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .family import FamilySolution, PhaseAccumulator, branch_function, fit_branch_and_K
from .numerics import cumulative_gauss, fd_derivative
from .primitive import PrimitivePair
from .reduction import ReducedRCE, ScalarSystem, StateMatrix2x2, companion

RESIDUAL_TOL = 1e-5
TD_BRANCHES = {"real": ("cosh", "sinh", "exp_plus", "exp_minus"),
               "imaginary": ("cos", "sin")}
# time-domain branch -> RCE branch of y'/y
RCE_OF = {"cosh": "tanh", "sinh": "coth", "cos": "tan", "sin": "cot",
          "exp_plus": "primitive_plus", "exp_minus": "primitive_minus"}


class TimeDomainError(ValueError):
    pass


@dataclass
class DynamicEigenvalue:
    t: np.ndarray
    values: np.ndarray
    source: FamilySolution


@dataclass
class TimeDomainSolution:
    t: np.ndarray
    A: float
    K: float
    branch: str
    envelope_g: np.ndarray
    f: np.ndarray
    y: np.ndarray
    dy: np.ndarray

    @property
    def y_samples(self) -> np.ndarray:
        return self.y


@dataclass
class FundamentalMatrix:
    t: np.ndarray
    V: np.ndarray          # (n, 2, 2)
    exponents: np.ndarray  # (n, 2) complex: integrals of lambda_1, lambda_2 from base
    phi: np.ndarray        # (n, 2, 2)
    base_index: int = 0

    def det(self) -> np.ndarray:
        return np.linalg.det(self.phi)

    def transition(self) -> np.ndarray:
        """phi(t) phi(base)^-1."""
        return self.phi @ np.linalg.inv(self.phi[self.base_index])


def _sigma_integral(r: ReducedRCE, t, base_index: int = 0) -> np.ndarray:
    if r.sigma0.is_constant():
        return r.sigma0.value.value * (t - t[base_index])
    return cumulative_gauss(lambda s: r.sigma0(s) * np.ones_like(s), t, base_index)


def dynamic_eigenvalues(r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator,
                        K: Optional[float] = None):
    """lambda = sigma0 + w01 nu for the complementary members with common K.

    Real kind: K=None gives the primitive pair (nu_R +/- nu_I), otherwise the
    tanh and coth members.  Imaginary kind: the cot and -tan members (K
    defaults to 0, the y1 = g sin(phi), y2 = g cos(phi) pair).
    """
    t = pair.t
    if pair.kind == "real":
        if K is None:
            members = [FamilySolution(pair, "primitive_plus", math.inf, phi),
                       FamilySolution(pair, "primitive_minus", math.inf, phi)]
        else:
            members = [FamilySolution(pair, "tanh", K, phi),
                       FamilySolution(pair, "coth", K, phi)]
    else:
        k = 0.0 if K is None else K
        members = [FamilySolution(pair, "cot", k, phi), FamilySolution(pair, "tan", k, phi)]
    out = []
    for m in members:
        lam = eigenvalue_of(r, m)
        out.append(DynamicEigenvalue(t, lam, m))
    return tuple(out)


def eigenvalue_of(r: ReducedRCE, member: FamilySolution) -> np.ndarray:
    t = member.pair.t
    w01 = r.omega01(t) * np.ones_like(t)
    s0 = r.sigma0(t) * np.ones_like(t)
    return s0 + w01 * member.values()


def envelope_g(r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator) -> np.ndarray:
    """exp(integral of sigma0) / sqrt(nu_I), with the integral zero at phi's base time."""
    t = pair.t
    s = _sigma_integral(r, t, 0)
    order = np.argsort(t)
    s = s - np.interp(phi.base_time, t[order], s[order])
    return np.exp(s) / np.sqrt(pair.nuI)


def _branch_values(branch: str, x):
    if branch == "cosh":
        return np.cosh(x), np.sinh(x)
    if branch == "sinh":
        return np.sinh(x), np.cosh(x)
    if branch == "cos":
        return np.cos(x), -np.sin(x)
    if branch == "sin":
        return np.sin(x), np.cos(x)
    if branch == "exp_plus":
        return np.exp(x), np.exp(x)
    if branch == "exp_minus":
        return np.exp(-x), -np.exp(-x)
    raise TimeDomainError(f"unknown branch {branch!r}")


def reconstruct_time_domain(r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator,
                            branch_choice: str, K: float = 0.0, A: float = 1.0
                            ) -> TimeDomainSolution:
    """y = A g f(phi - K) with g the envelope and f the chosen branch.

    For the exponential branches K only rescales A and is ignored."""
    if branch_choice not in TD_BRANCHES[pair.kind]:
        raise TimeDomainError(f"branch {branch_choice!r} does not match a {pair.kind} pair")
    if pair.has_poles:
        raise TimeDomainError("the primitive pair has poles; no envelope on this grid")
    t = pair.t
    g = envelope_g(r, pair, phi)
    x = phi.phi_f - (0.0 if branch_choice.startswith("exp") else K)
    f, fd = _branch_values(branch_choice, x)
    w01 = r.omega01(t) * np.ones_like(t)
    s0 = r.sigma0(t) * np.ones_like(t)
    y = A * g * f
    # y' = g [(sigma0 + w01 nu_R) f + w01 nu_I f_d], finite through zeros of f
    dy = A * g * ((s0 + w01 * pair.nuR) * f + w01 * pair.nuI * fd)
    return TimeDomainSolution(t, A, K, branch_choice, g, f, y, dy)


def fit_time_domain(r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator,
                    y0: float, dy0: float, t0: float) -> TimeDomainSolution:
    """The member with y(t0) = y0, y'(t0) = dy0 (one-point initial data only)."""
    w01 = float(r.omega01(t0))
    s0 = float(r.sigma0(t0))
    if y0 == 0.0 and dy0 == 0.0:
        raise TimeDomainError("zero initial data gives the trivial solution")
    nu0 = math.inf if y0 == 0.0 else (dy0 / y0 - s0) / w01
    member = fit_branch_and_K(pair, phi, nu0, t0)
    td_branch = {v: k for k, v in RCE_OF.items()}[member.branch]
    td = reconstruct_time_domain(r, pair, phi, td_branch, member.K, 1.0)
    i = int(np.argmin(np.abs(td.t - t0)))
    if abs(td.t[i] - t0) > 1e-12 * (1 + abs(t0)):
        raise TimeDomainError("t0 must be a grid sample")
    scale = y0 / td.y[i] if y0 != 0.0 else dy0 / td.dy[i]
    return TimeDomainSolution(td.t, scale, td.K, td_branch, td.envelope_g, td.f,
                              scale * td.y, scale * td.dy)


def source_residual(scalar: ScalarSystem, t, y) -> np.ndarray:
    """|y'' + r1 y' + r0 y| / (max|y| (1 + |r0| + |r1|)) with 5-point stencils."""
    t = np.asarray(t, dtype=float)
    dy = fd_derivative(t, y, 1)
    d2y = fd_derivative(t, y, 2)
    r1 = scalar.r1(t) * np.ones_like(t)
    r0 = scalar.r0(t) * np.ones_like(t)
    res = np.abs(d2y + r1 * dy + r0 * y)
    return res / (np.max(np.abs(y)) * (1.0 + np.abs(r0) + np.abs(r1)))


def _state_of(sys) -> StateMatrix2x2:
    if isinstance(sys, StateMatrix2x2):
        return sys
    if isinstance(sys, ScalarSystem):
        return companion(sys)
    raise TypeError("expected a StateMatrix2x2 or ScalarSystem")


def fundamental_matrix(sys, r: ReducedRCE, pair: PrimitivePair, phi: PhaseAccumulator,
                       members: Optional[tuple] = None) -> FundamentalMatrix:
    """phi(t) = V diag(e^{int lambda_1}, e^{int lambda_2}), V = [[1, 1], [nu1-alpha, nu2-alpha]].

    ``members`` defaults to the primitive pair.  The exponents are taken from
    the closed-form reconstruction, normalized by the envelope at the base time.
    """
    t = pair.t
    if members is None:
        members = (FamilySolution(pair, "primitive_plus", math.inf, phi),
                   FamilySolution(pair, "primitive_minus", math.inf, phi))
    nu1, nu2 = members[0].values(), members[1].values()
    if np.any(nu1 == nu2):
        raise TimeDomainError("the two members coincide somewhere on the grid; V is singular")
    al = r.alpha(t) * np.ones_like(t)
    cdt = complex if (np.iscomplexobj(nu1) or np.iscomplexobj(nu2)) else float
    V = np.empty((len(t), 2, 2), dtype=cdt)
    V[:, 0, 0] = 1.0
    V[:, 0, 1] = 1.0
    V[:, 1, 0] = nu1 - al
    V[:, 1, 1] = nu2 - al
    base = int(np.argmin(np.abs(t - phi.base_time)))
    g = envelope_g(r, pair, phi)
    ys = []
    for m in members:
        ys.append(_member_y(pair, phi, g, m))
    ys = [y / g[base] for y in ys]
    expo = np.stack([np.log(np.asarray(y, dtype=complex)) for y in ys], -1)
    E = np.stack(ys, -1)
    phim = V * E[:, None, :]
    return FundamentalMatrix(t, V, expo, phim, base)


def _member_y(pair: PrimitivePair, phi: PhaseAccumulator, g, m: FamilySolution):
    """g times the time-domain branch whose log-derivative is the member."""
    x = phi.phi_f - (0.0 if math.isinf(m.K) else m.K)
    if m.branch == "primitive_plus":
        return g * (np.exp(x) if pair.kind == "real" else np.exp(1j * x))
    if m.branch == "primitive_minus":
        return g * (np.exp(-x) if pair.kind == "real" else np.exp(-1j * x))
    f, _ = _branch_values({v: k for k, v in RCE_OF.items()}[m.branch], x)
    return g * f


def matrix_residual(sys, fm: FundamentalMatrix) -> np.ndarray:
    """max |phi' - A phi| / max|phi| per sample, phi' by 5-point stencils."""
    m = _state_of(sys)
    t = fm.t
    A = m.matrix(t)
    out = np.zeros(len(t))
    scale = np.max(np.abs(fm.phi), axis=(1, 2))
    for j in range(2):
        col = fm.phi[:, :, j]
        dcol = np.stack([fd_derivative(t, col[:, 0]), fd_derivative(t, col[:, 1])], -1)
        res = np.abs(dcol - np.einsum("nij,nj->ni", A, col)).max(axis=1)
        out = np.maximum(out, res / scale)
    return out


def abel_determinant(sys, t, base_index: int = 0) -> np.ndarray:
    """exp(integral of trace A) from the base sample."""
    m = _state_of(sys)
    tr = m.trace()
    return np.exp(cumulative_gauss(lambda s: tr(s) * np.ones_like(s), t, base_index))
