"""Primitive solution pairs nu_R +/- nu_I of the reduced equation.

Real pairs are the attractor/separatrix of the phase portrait.  They are
fixed by their asymptotics: the attractor is the forward limit of every
solution started in the far past, the separatrix the backward limit of every
solution started in the far future.  Numerically each is obtained by
starting at a pole (nu = +/-inf, i.e. w = 1/nu = 0) at an extended window
edge and integrating across the window; the edge is pushed out until the
result no longer moves.  This is the K1 = -2 selection of the decomposition
formula with its integration constants placed at the extended edges.

Imaginary pairs come from a non-real solution (any one is a valid primitive;
its conjugate is the partner).  Periodic coefficients use the eigenvectors
of the monodromy matrix, which gives the exactly periodic primitives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .numerics import chordal, cumulative_hermite, fd_derivative, stencil_mask
from .odeengine import (TimeGrid, RceTrajectory, IntegrationError, integrate_polar,
                        integrate_rce, integrate_state)
from .reduction import ReducedRCE

ANCHOR_TOL = 1e-12
EQ9_TOL = 1e-6
ATTRACTOR_TOL = 1e-6
CONTRACTION = 1e-4


class PrimitiveError(RuntimeError):
    """A primitive pair could not be established."""


class DegenerateError(PrimitiveError):
    """nu_I vanishes identically (repeated characteristic root)."""


@dataclass
class PrimitivePair:
    """Sampled primitive pair.  For ``kind == 'imaginary'`` ``nuI`` holds nu_Im."""

    grid: TimeGrid
    nuR: np.ndarray
    nuI: np.ndarray
    kind: str
    dnuR: np.ndarray
    dnuI: np.ndarray
    phase: Optional[np.ndarray] = None   # integral of w01*nu_I from grid[0], if known exactly
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return self.grid.samples

    @property
    def plus(self) -> np.ndarray:
        return self.nuR + (self.nuI if self.kind == "real" else 1j * self.nuI)

    @property
    def minus(self) -> np.ndarray:
        return self.nuR - (self.nuI if self.kind == "real" else 1j * self.nuI)

    @property
    def has_poles(self) -> bool:
        return not bool(np.all(np.isfinite(self.nuI)) and np.all(self.nuI > 0))

    def eq9_residual(self, r: ReducedRCE, interior: int = 3) -> np.ndarray:
        """|nu_R + nu_I'/(2 w01 nu_I)| / (1 + |nu_R|) from finite differences of ln nu_I."""
        return eq9_residual(r, self.t, self.nuR, self.nuI, interior)


@dataclass
class NoAttractor:
    """Forward probes did not converge: the primitive pair is not real."""

    spread: float
    initial_spread: float
    probes: list


def eq9_residual(r, t, nuR, nuI, interior: int = 3) -> np.ndarray:
    t = np.asarray(t)
    ln = np.log(np.abs(nuI))
    dln = fd_derivative(t, ln)
    w01 = r.omega01(t) * np.ones_like(t)
    res = np.abs(nuR + dln / (2.0 * w01)) / (1.0 + np.abs(nuR))
    if interior:
        res = res[interior:-interior]
    return res


def _derivs(r: ReducedRCE, t, nuR, nuI, kind):
    w01 = r.omega01(t) * np.ones_like(t)
    w02 = r.omega02(t) * np.ones_like(t)
    sgn = 1.0 if kind == "real" else -1.0
    with np.errstate(invalid="ignore", over="ignore"):
        dR = -w01 * (nuR * nuR + sgn * nuI * nuI) + w02
        dI = -2.0 * w01 * nuR * nuI
    return dR, dI


def make_pair(r: ReducedRCE, grid: TimeGrid, nuR, nuI, kind, phase=None, method="",
              **diag) -> PrimitivePair:
    nuR = np.asarray(nuR, dtype=float)
    nuI = np.asarray(nuI, dtype=float)
    dR, dI = _derivs(r, grid.samples, nuR, nuI, kind)
    return PrimitivePair(grid, nuR, nuI, kind, dR, dI, phase, method, dict(diag))


def _grid(window_or_grid, r: ReducedRCE, n: int) -> TimeGrid:
    if isinstance(window_or_grid, TimeGrid):
        return window_or_grid
    w = tuple(window_or_grid)
    if len(w) == 2:
        return TimeGrid.uniform(w[0], w[1], n, r.singular_points)
    return TimeGrid.from_samples(w, r.singular_points)


# --------------------------------------------------------------------------
# closed form for constant coefficients

def autonomous_pair(r: ReducedRCE, grid: TimeGrid) -> PrimitivePair:
    a = r.omega01.value.value
    b = r.omega02.value.value
    n = len(grid)
    if b == 0.0:
        raise DegenerateError("w02 = 0: the primitive solutions coincide (nu_I = 0)")
    kind = "real" if b / a > 0 else "imaginary"
    mag = math.sqrt(abs(b / a))
    phase = a * mag * (grid.samples - grid.samples[0])
    return make_pair(r, grid, np.zeros(n), np.full(n, mag), kind, phase, "closed form")


# --------------------------------------------------------------------------
# anchored real primitives

def _edge_limits(r: ReducedRCE, lo: float, hi: float, domain=None):
    """How far the window may be extended on each side."""
    left, right = -math.inf, math.inf
    for s in r.singular_points:
        if s < lo:
            left = max(left, s)
        elif s > hi:
            right = min(right, s)
    if domain is not None:
        left = max(left, domain[0])
        right = min(right, domain[1])
    return left, right


def _anchored(r: ReducedRCE, samples: np.ndarray, side: str, tol: float, max_doublings: int,
              backend=None):
    """Trajectory on ``samples`` started from a pole at an extended edge.

    ``side='left'`` gives the attractor (forward from the far past),
    ``side='right'`` the separatrix (backward from the far future).
    Returns (values, events, edge distance, converged flag).
    """
    lo, hi = samples[0], samples[-1]
    span = hi - lo
    left, right = _edge_limits(r, lo, hi)
    prev = None
    L = span
    for k in range(max_doublings + 1):
        if side == "left":
            edge = lo - L
            limited = edge <= left
            if limited:
                edge = left + (lo - left) * 1e-6
            ts = np.concatenate([[edge], samples]) if edge < lo else samples
            tr = integrate_rce(r, math.inf, ts, tol=tol, backend=backend)
            vals = tr.values[-len(samples):].real
            probe = vals[0]
        else:
            edge = hi + L
            limited = edge >= right
            if limited:
                edge = right - (right - hi) * 1e-6
            ts = np.concatenate([[edge], samples[::-1]]) if edge > hi else samples[::-1]
            tr = integrate_rce(r, math.inf, ts, tol=tol, backend=backend)
            vals = tr.values[-len(samples):].real[::-1]
            probe = vals[-1]
        if prev is not None:
            if chordal(probe, prev) <= 10 * tol * (1.0 + min(abs(probe), 1e6)) or limited:
                return vals, tr.escape_events, L, True
        elif limited:
            return vals, tr.escape_events, L, True
        prev = probe
        L *= 2.0
    return vals, tr.escape_events, L, False


def anchored_real_pair(r: ReducedRCE, grid: TimeGrid, tol: float = ANCHOR_TOL,
                       max_doublings: int = 40, backend=None) -> PrimitivePair:
    """Attractor and separatrix by anchored integration; nu_R, nu_I from half sum/difference."""
    s = grid.samples
    forward = s[-1] > s[0]
    asc = s if forward else s[::-1]
    va, ea, La, ca = _anchored(r, asc, "left", tol, max_doublings, backend)
    vs, es, Ls, cs = _anchored(r, asc, "right", tol, max_doublings, backend)
    if not forward:
        va, vs = va[::-1], vs[::-1]
    nuR = 0.5 * (va + vs)
    nuI = 0.5 * (va - vs)
    finite = np.isfinite(nuI)
    if finite.any() and np.median(nuI[finite]) < 0:
        raise PrimitiveError("anchored solutions are ordered against w01*nu_I > 0")
    phase = None
    if np.all(finite) and np.all(nuI > 0):
        dR, dI = _derivs(r, s, nuR, nuI, "real")
        w01 = r.omega01(s) * np.ones_like(s)
        dw01 = r.omega01.d(s) * np.ones_like(s)
        phase = cumulative_hermite(s, w01 * nuI, dw01 * nuI + w01 * dI)
    return make_pair(r, grid, nuR, nuI, "real", phase, "anchored",
                     attractor_events=[e.t_escape for e in ea],
                     separatrix_events=[e.t_escape for e in es],
                     extension=(La, Ls), converged=(ca and cs))


# --------------------------------------------------------------------------
# literal quadrature route (pole-free inputs)

def _extension(edge, far, limit, h0, n):
    """Samples from ``edge`` out to ``far``, graded toward a nearby singular point."""
    d = far - edge
    if math.isfinite(limit) and abs(far - limit) < 1e-3 * abs(edge - limit):
        # cluster toward the singular point
        return limit + (edge - limit) * np.geomspace(1.0, (far - limit) / (edge - limit), n)
    off = np.concatenate([[0.0], np.geomspace(min(h0, abs(d) / n), abs(d), n - 1)])
    return edge + math.copysign(1.0, d) * off


def quadrature_real_pair(r: ReducedRCE, t, nu, tol: float = ANCHOR_TOL,
                         extension: Optional[tuple] = None, n_ext: int = 4001,
                         backend=None) -> PrimitivePair:
    """Decompose a known real solution by the integrating-factor route.

    With E = int 2 w01 nu, the other solutions are nu + 1/v where
    v' = 2 w01 nu v + w01.  Anchoring v = 0 at the far-past edge gives the
    attractor, at the far-future edge the separatrix.  ``nu`` is continued
    onto the extension by integration and must stay pole-free.
    """
    t = np.asarray(t, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if t[-1] < t[0]:
        pair = quadrature_real_pair(r, t[::-1], nu[::-1], tol, extension, n_ext, backend)
        return make_pair(r, TimeGrid.from_samples(t), pair.nuR[::-1], pair.nuI[::-1], "real",
                         None, "quadrature", **pair.diagnostics)
    lo, hi = t[0], t[-1]
    left, right = _edge_limits(r, lo, hi)
    if extension is None:
        extension = (1e3 * (hi - lo), 1e3 * (hi - lo))
    t_lo = max(lo - extension[0], left + (lo - left) * 1e-6 if math.isfinite(left) else -math.inf)
    t_hi = min(hi + extension[1], right - (right - hi) * 1e-6 if math.isfinite(right) else math.inf)
    h0 = (hi - lo) / max(len(t) - 1, 1)
    left_ext = _extension(lo, t_lo, left, h0, n_ext)[::-1]
    right_ext = _extension(hi, t_hi, right, h0, n_ext)
    back = integrate_rce(r, nu[0], left_ext[::-1], tol=tol, backend=backend)
    fwd = integrate_rce(r, nu[-1], right_ext, tol=tol, backend=backend)
    if back.escape_events or fwd.escape_events:
        raise PrimitiveError("quadrature route needs a pole-free continuation of the input")
    T = np.concatenate([left_ext[:-1], t, right_ext[1:]])
    N = np.concatenate([back.values.real[::-1][:-1], nu, fwd.values.real[1:]])
    w01 = r.omega01(T) * np.ones_like(T)
    dw01 = r.omega01.d(T) * np.ones_like(T)
    dN = -w01 * N * N + r.omega02(T)
    f = 2.0 * w01 * N
    E = cumulative_hermite(T, f, 2.0 * dw01 * N + 2.0 * w01 * dN)
    h = np.diff(T)
    dE = np.diff(E)
    np_err = np.seterr(over="ignore", invalid="ignore")
    # G_a(t) = int_{t_lo}^t w01(s) exp(E(t) - E(s)) ds, stepped forward
    # local integrand on [t_i, t_i+1]: w01 exp(E_{i+1} - E(s)); slope (w01' - w01*f) * same
    ga = np.zeros_like(T)
    fa0 = w01[:-1] * np.exp(dE)
    fa1 = w01[1:]
    da0 = (dw01[:-1] - w01[:-1] * f[:-1]) * np.exp(dE)
    da1 = dw01[1:] - w01[1:] * f[1:]
    loc = 0.5 * h * (fa0 + fa1) + h * h / 12.0 * (da0 - da1)
    grow = np.exp(dE)
    for i in range(len(T) - 1):
        ga[i + 1] = grow[i] * ga[i] + loc[i]
    # G_s(t) = int_t^{t_hi} w01(s) exp(E(t) - E(s)) ds, stepped backward
    gs = np.zeros_like(T)
    fb0 = w01[:-1]
    fb1 = w01[1:] * np.exp(-dE)
    db0 = dw01[:-1] - w01[:-1] * f[:-1]
    db1 = (dw01[1:] - w01[1:] * f[1:]) * np.exp(-dE)
    locb = 0.5 * h * (fb0 + fb1) + h * h / 12.0 * (db0 - db1)
    shrink = np.exp(-dE)
    for i in range(len(T) - 2, -1, -1):
        gs[i] = shrink[i] * gs[i + 1] + locb[i]
    np.seterr(**np_err)
    sl = slice(n_ext - 1, n_ext - 1 + len(t))
    with np.errstate(divide="ignore"):
        nu_a = nu + 1.0 / ga[sl]
        nu_s = nu - 1.0 / gs[sl]
    nuR = 0.5 * (nu_a + nu_s)
    nuI = 0.5 * (nu_a - nu_s)
    return make_pair(r, TimeGrid.from_samples(t), nuR, nuI, "real", None, "quadrature",
                     extension=(lo - t_lo, t_hi - hi))


# --------------------------------------------------------------------------
# complex primitives

def wkb_guess(r: ReducedRCE, t: float) -> complex:
    """Frozen-coefficient fixed point j*k with the first WKB correction -k'/(2 w01 k)."""
    a, b = r.omega01(t), r.omega02(t)
    if b / a >= 0:
        raise PrimitiveError(f"no complex frozen fixed point at t={t} (w02/w01 >= 0); "
                             "supply a guess")
    k = math.sqrt(-b / a)
    da, db = r.omega01.d(t), r.omega02.d(t)
    dk = -(db * a - b * da) / (a * a) / (2.0 * k)
    return complex(-dk / (2.0 * a * k), k)


def complex_pair_from(r: ReducedRCE, grid: TimeGrid, t_ref: float, nu_ref: complex,
                      tol: float = 1e-12, method: str = "", backend=None) -> PrimitivePair:
    """Integrate the non-real solution through ``nu_ref`` at ``t_ref`` over the grid."""
    s = grid.samples
    forward = s[-1] > s[0]
    asc = s if forward else s[::-1]
    nu_ref = complex(nu_ref)
    if nu_ref.imag < 0:
        nu_ref = nu_ref.conjugate()
    if nu_ref.imag == 0:
        raise PrimitiveError("complex primitive needs a non-real reference value")
    nuR = np.empty_like(asc)
    ell = np.empty_like(asc)
    ph = np.empty_like(asc)
    below = asc < t_ref
    above = asc > t_ref
    at = ~(below | above)
    ref_state = (nu_ref.real, math.log(nu_ref.imag), 0.0)
    if at.any():
        nuR[at], ell[at], ph[at] = ref_state
    if above.any():
        ts = np.concatenate([[t_ref], asc[above]])
        p = integrate_polar(r, nu_ref, ts, tol=tol, backend=backend)
        nuR[above], ell[above], ph[above] = p.nuR[1:], p.ell[1:], p.phase[1:]
    if below.any():
        ts = np.concatenate([[t_ref], asc[below][::-1]])
        p = integrate_polar(r, nu_ref, ts, tol=tol, backend=backend)
        nuR[below], ell[below], ph[below] = p.nuR[1:][::-1], p.ell[1:][::-1], p.phase[1:][::-1]
    if not forward:
        nuR, ell, ph = nuR[::-1], ell[::-1], ph[::-1]
    phase = ph - ph[0]
    return make_pair(r, grid, nuR, np.exp(ell), "imaginary", phase, method,
                     t_ref=t_ref, nu_ref=nu_ref, log_nuIm=ell)


def find_primitive_backward(r: ReducedRCE, guess: Optional[complex] = None,
                            t_start_far: Optional[float] = None, window=None, n: int = 2001,
                            tol: float = 1e-12, eq9_tol: float = 1e-5, verify: bool = True,
                            backend=None) -> PrimitivePair:
    """Back-propagate a complex guess from ``t_start_far`` across the window.

    The default guess is the WKB-corrected frozen fixed point at t_start_far.
    ``t_start_far`` may also lie inside the window, in which case the solution
    is propagated both ways.  The primitive residual (finite differences of
    ln nu_Im) is the convergence certificate.
    """
    grid = _grid(window, r, n)
    s = grid.samples
    if t_start_far is None:
        t_start_far = float(max(s[0], s[-1]))
    if guess is None:
        guess = wkb_guess(r, t_start_far)
    pair = complex_pair_from(r, grid, t_start_far, guess, tol, "back-propagated", backend)
    res = pair.eq9_residual(r)
    pair.diagnostics["eq9_max"] = float(res.max())
    if res.max() > eq9_tol:
        raise PrimitiveError(f"primitive residual {res.max():.3g} exceeds {eq9_tol:g}; "
                             "move t_start_far further out")
    if verify:
        pair.diagnostics["conjugate_dev"] = conjugate_check(r, pair, backend=backend)
    return pair


def conjugate_check(r: ReducedRCE, pair: PrimitivePair, floor: float = 1e-2,
                    backend=None) -> float:
    """Forward-integrate the conjugate primitive and report its relative sup deviation.

    The check starts at the first sample where nu_Im reaches ``floor`` times
    its maximum: where nu_Im is negligible the conjugate sits on a locally
    repelling real solution and no forward simulation can follow it.
    """
    t = pair.t
    i0 = int(np.argmax(pair.nuI >= floor * np.max(pair.nuI)))
    start = complex(pair.nuR[i0], -pair.nuI[i0])
    tr = integrate_rce(r, start, t[i0:], tol=1e-11, backend=backend)
    ref = pair.minus[i0:]
    return float(np.max(np.abs(tr.values - ref) / (1.0 + np.abs(ref))))


# --------------------------------------------------------------------------
# periodic coefficients

def monodromy(r: ReducedRCE, t0: float, T: float, tol: float = 1e-12, backend=None):
    return integrate_state(r.state, np.array([t0, t0 + T]), tol=tol, backend=backend)[-1]


def nu_from_state(r: ReducedRCE, t: float, x) -> complex:
    """RCE value nu = (y'/y - sigma0)/w01 for the state vector x at time t."""
    x1, x2 = complex(x[0]), complex(x[1])
    if x1 == 0:
        return complex(math.inf, 0.0)
    A = r.state.matrix(t)
    lam = A[0, 0] + A[0, 1] * x2 / x1
    return (lam - r.sigma0(t)) / r.omega01(t)


def floquet_pair(r: ReducedRCE, grid: TimeGrid, T: Optional[float] = None,
                 tol: float = 1e-12, backend=None) -> PrimitivePair:
    """Periodic primitives from the monodromy eigenvectors."""
    T = r.period if T is None else T
    if T is None:
        raise PrimitiveError("no period given")
    s = grid.samples
    t0 = float(min(s[0], s[-1]))
    M = monodromy(r, t0, T, tol, backend)
    mu, vecs = np.linalg.eig(M)
    diag = dict(multipliers=mu, monodromy=M)
    if np.all(np.abs(mu.imag) > 1e-9 * np.abs(mu)):
        nu0 = nu_from_state(r, t0, vecs[:, 0])
        pair = complex_pair_from(r, grid, t0, nu0, tol, "monodromy", backend)
        pair.diagnostics.update(diag)
        return pair
    mu = mu.real
    if abs(abs(mu[0]) - abs(mu[1])) <= 1e-9 * max(abs(mu[0]), abs(mu[1])):
        raise DegenerateError("multipliers of equal modulus: degenerate primitive pair")
    order = np.argsort(-np.abs(mu))
    nu_a0 = nu_from_state(r, t0, vecs[:, order[0]].real).real
    nu_s0 = nu_from_state(r, t0, vecs[:, order[1]].real).real
    asc = s if s[-1] > s[0] else s[::-1]
    va = integrate_rce(r, nu_a0, asc, tol=tol, backend=backend)
    # the separatrix is only stable backward: start it one whole number of
    # periods past the window end, where it repeats its value at t0
    k = max(1, math.ceil((asc[-1] - t0) / T - 1e-12))
    t_end = t0 + k * T
    back = asc[::-1] if t_end <= asc[-1] else np.concatenate([[t_end], asc[::-1]])
    vs = integrate_rce(r, nu_s0, back, tol=tol, backend=backend)
    a, b = va.values.real, vs.values.real[-len(asc):][::-1]
    if asc is not s:
        a, b = a[::-1], b[::-1]
    nuR, nuI = 0.5 * (a + b), 0.5 * (a - b)
    phase = None
    if np.all(np.isfinite(nuI)) and np.all(nuI > 0):
        dR, dI = _derivs(r, s, nuR, nuI, "real")
        w01 = r.omega01(s) * np.ones_like(s)
        dw01 = r.omega01.d(s) * np.ones_like(s)
        phase = cumulative_hermite(s, w01 * nuI, dw01 * nuI + w01 * dI)
    pair = make_pair(r, grid, nuR, nuI, "real", phase, "monodromy",
                     attractor_events=[e.t_escape for e in va.escape_events],
                     separatrix_events=[e.t_escape for e in vs.escape_events])
    pair.diagnostics.update(diag)
    return pair


# --------------------------------------------------------------------------
# forward probe search and decomposition

def default_probes(r: ReducedRCE, t0: float) -> list[float]:
    scale = math.sqrt(abs(r.omega02(t0) / r.omega01(t0))) + 1.0
    return [0.0, scale, -scale, 3.0 * scale, -3.0 * scale]


def find_primitive_forward(r: ReducedRCE, probe_ics: Optional[Sequence[float]] = None,
                           window=None, n: int = 2001, tol: float = 1e-10,
                           conv_tol: float = ATTRACTOR_TOL, pair: bool = True,
                           backend=None):
    """Probe for an attractor.  Returns a real PrimitivePair or NoAttractor.

    Probes converge when, over the trailing 20% of the window, their pairwise
    chordal distance is at most ``conv_tol`` or has contracted to at most
    1e-4 of the initial spread.
    """
    grid = _grid(window, r, n)
    s = grid.samples
    if probe_ics is None:
        probe_ics = default_probes(r, s[0])
    probes = []
    for ic in probe_ics:
        try:
            probes.append(integrate_rce(r, ic, grid, tol=tol, backend=backend))
        except IntegrationError as exc:
            raise PrimitiveError(f"probe {ic} failed: {exc}") from exc
    tail = slice(int(0.8 * (len(s) - 1)), None)
    vals = np.array([p.values.real for p in probes])
    spread = max(float(np.max(chordal(vals[i, tail], vals[j, tail])))
                 for i in range(len(vals)) for j in range(i + 1, len(vals))) if len(vals) > 1 else 0.0
    init = max(float(chordal(vals[i, 0], vals[j, 0]))
               for i in range(len(vals)) for j in range(i + 1, len(vals))) if len(vals) > 1 else 0.0
    converged = spread <= conv_tol or spread <= CONTRACTION * init
    if not converged:
        return NoAttractor(spread, init, probes)
    if not pair:
        return probes[0]
    out = decompose_to_primitive(r, probes[0], "real", backend=backend)
    out.diagnostics.update(probe_spread=spread, probe_initial_spread=init)
    return out


def _sampled(nu):
    if isinstance(nu, RceTrajectory):
        return nu.grid, nu.values
    t, v = nu
    return TimeGrid.from_samples(t), np.asarray(v)


def pole_mask(t, nu, pole_guard: float = 1e3, resolution: float = 2e-2) -> np.ndarray:
    """Samples too close to a pole for 5-point differences: |nu| above the guard
    or x = |nu| h above ``resolution``.  Near a pole nu ~ 1/(t - te) and the
    stencil's own normalized error is about 4 x^4, 6e-7 at the default."""
    h = np.abs(np.gradient(np.asarray(t, dtype=float)))
    with np.errstate(invalid="ignore"):
        a = np.abs(nu)
        return ~np.isfinite(nu) | (a > pole_guard) | (a * h > resolution)


def solution_residual(r: ReducedRCE, t, nu, pole_guard: float = 1e3) -> np.ndarray:
    """Normalized RCE residual of a sampled real solution, by finite differences.

    Samples within reach of a pole (|nu| > pole_guard anywhere in the stencil)
    are excluded (returned as nan).
    """
    t = np.asarray(t)
    nu = np.asarray(nu, dtype=float)
    bad = pole_mask(t, nu, pole_guard)
    safe = np.where(bad, 0.0, nu)
    d = fd_derivative(t, safe)
    res = np.abs(d - r.rhs(t, safe)) / (1.0 + safe ** 2)
    near = stencil_mask(bad)
    res[near] = np.nan
    return res


def decompose_to_primitive(r: ReducedRCE, nu, kind_hint: Optional[str] = None,
                           method: str = "anchored", check_tol: float = 1e-5,
                           backend=None) -> PrimitivePair:
    """Recover the primitive pair from one known solution on its grid.

    ``nu`` is an RceTrajectory or a (t, values) tuple.  The input is residual
    checked; its fitted family constant is returned in the diagnostics.
    """
    grid, vals = _sampled(nu)
    s = grid.samples
    if np.iscomplexobj(vals) and np.all(np.abs(vals.imag) <= 1e-14 * (1 + np.abs(vals.real))):
        vals = vals.real
    if not np.iscomplexobj(vals) and len(s) >= 5:
        res = solution_residual(r, s, vals)
        rmax = float(np.nanmax(res)) if np.any(np.isfinite(res)) else 0.0
        if rmax > check_tol:
            raise PrimitiveError(f"input is not an RCE solution (residual {rmax:.3g})")
    if kind_hint is None and _disconjugate(r, s):
        kind_hint = "real"
    if kind_hint is None and not (r.is_autonomous() or r.period is not None):
        probe = find_primitive_forward(r, None, grid, pair=False, backend=backend)
        kind_hint = "imaginary" if isinstance(probe, NoAttractor) else "real"
    if r.is_autonomous():
        pair = autonomous_pair(r, grid)
    elif r.period is not None:
        pair = floquet_pair(r, grid, backend=backend)
    elif kind_hint == "real":
        if method == "quadrature":
            pair = quadrature_real_pair(r, s, np.asarray(vals).real, backend=backend)
        else:
            pair = anchored_real_pair(r, grid, backend=backend)
    else:
        pair = find_primitive_backward(r, window=grid, backend=backend)
    if pair.kind != kind_hint:
        pair.diagnostics["kind_hint_overridden"] = kind_hint
    return pair


def _disconjugate(r: ReducedRCE, t) -> bool:
    with np.errstate(all="ignore"):
        q = np.asarray(r.omega02(t) / r.omega01(t)) * np.ones_like(t)
    return bool(np.all(np.isfinite(q)) and np.all(q > 0))


def primitive_pair(r: ReducedRCE, window, n: int = 2001, kind_hint: Optional[str] = None,
                   backend=None, **kw) -> PrimitivePair:
    """Best available primitive pair for the window: closed form, monodromy,
    anchored real, or back-propagated complex."""
    grid = _grid(window, r, n)
    if r.is_autonomous():
        return autonomous_pair(r, grid)
    if r.period is not None:
        return floquet_pair(r, grid, backend=backend)
    if kind_hint is None and _disconjugate(r, grid.samples):
        # w02/w01 > 0 throughout: nu_I is real, no probing needed
        kind_hint = "real"
    if kind_hint is None:
        probe = find_primitive_forward(r, None, grid, pair=False, backend=backend)
        kind_hint = "imaginary" if isinstance(probe, NoAttractor) else "real"
    if kind_hint == "real":
        return anchored_real_pair(r, grid, backend=backend)
    return find_primitive_backward(r, window=grid, backend=backend, **kw)


def complementary_of(r: ReducedRCE, nu1, pair: PrimitivePair, tol: float = 1e-5):
    """nu1 - 2 nu_I (nu_I -> j nu_Im for the imaginary kind), checked against the RCE."""
    t = pair.t
    nu1 = np.asarray(nu1)
    if not np.iscomplexobj(nu1) and len(t) >= 5:
        res = solution_residual(r, t, nu1)
        if np.any(np.isfinite(res)) and np.nanmax(res) > tol:
            raise PrimitiveError(f"input residual {np.nanmax(res):.3g} exceeds {tol:g}")
    step = pair.nuI if pair.kind == "real" else 1j * pair.nuI
    return nu1 - 2.0 * step
