"""Grids, quadrature and finite-difference helpers shared by the solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# 5-point Gauss-Legendre on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


def make_grid(t0: float, t1: float, n: int = 2001, singular_points=(),
              graded: bool = True) -> np.ndarray:
    """Monotone grid from ``t0`` to ``t1`` (either order) with ``n`` samples.

    When a declared singular point lies just outside an end of the interval
    the spacing is graded geometrically toward it, so samples stay resolved
    where the coefficients blow up.  A singular point strictly inside the
    closed interval is an error.
    """
    if n < 2:
        raise ValueError("grid needs at least two samples")
    lo, hi = min(t0, t1), max(t0, t1)
    for s in singular_points:
        if lo <= s <= hi:
            raise ValueError(f"singular point t={s} lies inside the window [{lo}, {hi}]")
    u = np.linspace(0.0, 1.0, n)
    grid = lo + (hi - lo) * u
    if graded and singular_points:
        span = hi - lo
        d_lo = min((lo - s for s in singular_points if s < lo), default=math.inf)
        d_hi = min((s - hi for s in singular_points if s > hi), default=math.inf)
        if d_lo < 0.5 * span or d_hi < 0.5 * span:
            # cluster samples toward the nearby singular end(s)
            grid = _graded(lo, hi, u, d_lo, d_hi)
    grid[0], grid[-1] = lo, hi
    return grid if t1 >= t0 else grid[::-1].copy()


def _graded(lo, hi, u, d_lo, d_hi):
    """Monotone map of [0,1] onto [lo,hi] with spacing ~ distance to a singular point."""
    span = hi - lo

    def x_of(t):
        # increasing stretch: dx/dt ~ 1/(distance to the nearest singular point)
        v = (t - lo) / span
        if math.isfinite(d_lo):
            v = v + np.log1p((t - lo) / d_lo)
        if math.isfinite(d_hi):
            v = v - np.log1p((hi - t) / d_hi)
        return v

    tt = np.linspace(lo, hi, 20001)
    xx = x_of(tt)
    xs = xx[0] + (xx[-1] - xx[0]) * u
    return np.interp(xs, xx, tt)


def cumulative_hermite(t, f, df, base_index: int = 0) -> np.ndarray:
    """Cumulative integral of sampled ``f`` with exact derivatives ``df``.

    Uses the end-corrected trapezoid rule (fourth order); the result is zero
    at ``t[base_index]``.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f)
    df = np.asarray(df)
    h = np.diff(t)
    inc = 0.5 * h * (f[:-1] + f[1:]) + h * h / 12.0 * (df[:-1] - df[1:])
    out = np.concatenate([[0.0 * inc[:1].sum()], np.cumsum(inc)])
    return out - out[base_index]


def cumulative_gauss(fn, t, base_index: int = 0) -> np.ndarray:
    """Cumulative integral of a vectorized callable over consecutive grid intervals.

    Five-point Gauss-Legendre per interval; zero at ``t[base_index]``.
    """
    t = np.asarray(t, dtype=float)
    h = np.diff(t)
    nodes = t[:-1, None] + h[:, None] * GL_NODES[None, :]
    vals = np.asarray(fn(nodes.ravel())).reshape(nodes.shape)
    inc = h * (vals @ GL_WEIGHTS)
    out = np.concatenate([[0.0], np.cumsum(inc)])
    return out - out[base_index]


def integrate_gauss(fn, a: float, b: float, pieces: int = 64) -> float:
    """Definite integral of a vectorized callable by composite Gauss-Legendre."""
    edges = np.linspace(a, b, pieces + 1)
    return float(cumulative_gauss(fn, edges)[-1])


def fornberg_weights(z: float, x, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` for derivatives 0..m on nodes ``x``.

    Fornberg's recursion; returns an array of shape (m+1, len(x)).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5 = 1.0, c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def fd_derivative(t, y, order: int = 1, width: int = 5) -> np.ndarray:
    """Derivative of sampled ``y`` on a (possibly nonuniform) grid.

    Centered ``width``-point stencils in the interior, shifted one-sided
    stencils near the ends.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y)
    n = len(t)
    if n < width:
        raise ValueError("too few samples for the stencil")
    half = width // 2
    out = np.empty(n, dtype=np.result_type(y, float))
    h = np.diff(t)
    if np.all(np.abs(h - h[0]) <= 1e-9 * abs(h[0])):
        # uniform grid: one weight set per stencil offset
        hm = (t[-1] - t[0]) / (n - 1)
        base = np.arange(width) * hm
        w = fornberg_weights(base[half], base, order)[order]
        out[half:n - half] = sum(w[k] * y[k:n - width + 1 + k] for k in range(width))
        for i in list(range(half)) + list(range(n - half, n)):
            s = min(max(i - half, 0), n - width)
            w = fornberg_weights(base[i - s], base, order)[order]
            out[i] = w @ y[s:s + width]
        return out
    for i in range(n):
        s = min(max(i - half, 0), n - width)
        idx = slice(s, s + width)
        w = fornberg_weights(t[i], t[idx], order)[order]
        out[i] = w @ y[idx]
    return out


def stencil_mask(bad, width: int = 5) -> np.ndarray:
    """Samples whose ``fd_derivative`` stencil touches a bad sample."""
    bad = np.asarray(bad, dtype=bool)
    n = len(bad)
    half = width // 2
    out = np.zeros(n, dtype=bool)
    for i in np.nonzero(bad)[0]:
        out[max(i - half, 0):i + half + 1] = True
        # shifted one-sided stencils near the ends reach further in
        if i < width:
            out[:half] = True
        if i >= n - width:
            out[n - half:] = True
    return out


def hermite_interp(t, f, df, tq):
    """Cubic Hermite interpolation of samples with known slopes."""
    t = np.asarray(t, dtype=float)
    scalar = np.ndim(tq) == 0
    tq = np.atleast_1d(np.asarray(tq, dtype=float))
    rev = t[-1] < t[0]
    if rev:
        t, f, df = t[::-1], np.asarray(f)[::-1], np.asarray(df)[::-1]
    f = np.asarray(f)
    df = np.asarray(df)
    i = np.clip(np.searchsorted(t, tq, side="right") - 1, 0, len(t) - 2)
    h = t[i + 1] - t[i]
    s = (tq - t[i]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    out = h00 * f[i] + h10 * h * df[i] + h01 * f[i + 1] + h11 * h * df[i + 1]
    return out[0] if scalar else out


@dataclass
class Sampled:
    """A real or complex function sampled on a grid, with exact slopes."""

    t: np.ndarray
    v: np.ndarray
    dv: np.ndarray

    def __call__(self, tq):
        return hermite_interp(self.t, self.v, self.dv, tq)

    def index_of(self, tq: float) -> int:
        """Index of a grid sample equal to ``tq`` (within 1e-12 relative), else -1."""
        i = int(np.argmin(np.abs(self.t - tq)))
        return i if abs(self.t[i] - tq) <= 1e-12 * (1.0 + abs(tq)) else -1


def chordal(a, b):
    """Pole-robust distance between reals via the arctangent chart."""
    return np.abs(np.angle(np.exp(2j * (np.arctan(a) - np.arctan(b))))) / 2.0
