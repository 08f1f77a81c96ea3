"""Adaptive integration of the reduced equation with pole continuation.

The state is complex (two real components).  When |nu| exceeds the escape
cap the integrator switches to w = 1/nu, which obeys w' = w01 - w02 w^2 and
is smooth through the pole; each sign change of a real w is a finite escape
event, refined by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .coeffexpr import CoefficientFn, compile_program, scalar_function
from .numerics import make_grid
from .reduction import ReducedRCE, StateMatrix2x2

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
ESCAPE_CAP = 1e6
REPORT_CAP = 1e12

DIRECT, RECIPROCAL = "direct", "reciprocal"


class IntegrationError(RuntimeError):
    """The stepper could not continue (step underflow, NaN coefficients, ...)."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t


class BlowUpError(IntegrationError):
    """The reciprocal variable failed to cross zero: a blow-up without return."""


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    samples: np.ndarray

    @property
    def direction(self) -> str:
        return "forward" if self.t1 >= self.t0 else "backward"

    def __len__(self):
        return len(self.samples)

    @classmethod
    def uniform(cls, t0: float, t1: float, n: int = 2001, singular_points=()) -> "TimeGrid":
        return cls(float(t0), float(t1), make_grid(t0, t1, n, singular_points))

    @classmethod
    def from_samples(cls, samples, singular_points=()) -> "TimeGrid":
        s = np.asarray(samples, dtype=float)
        d = np.diff(s)
        if len(s) < 1 or not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("grid samples must be strictly monotone")
        lo, hi = s.min(), s.max()
        for p in singular_points:
            if lo <= p <= hi:
                raise ValueError(f"grid contains the singular point t={p}")
        return cls(float(s[0]), float(s[-1]), s)


@dataclass(frozen=True)
class EscapeEvent:
    t_escape: float
    side_signs: tuple[int, int] = (-1, 1)


@dataclass
class RceTrajectory:
    grid: TimeGrid
    values: np.ndarray            # complex; +/-inf exactly at a pole sample
    escape_events: list
    variable_log: list            # (t_start, t_end, DIRECT | RECIPROCAL)
    modes: np.ndarray             # per-sample: 0 direct, 1 reciprocal
    recip: np.ndarray             # per-sample w = 1/nu (complex)
    status: str = "ok"
    n_steps: int = 0
    n_rejected: int = 0
    stopped_at: Optional[float] = None

    @property
    def t(self) -> np.ndarray:
        return self.grid.samples

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def finite_mask(self, cap: float = REPORT_CAP) -> np.ndarray:
        return np.isfinite(self.values) & (np.abs(self.values) < cap)

    def event_times(self) -> np.ndarray:
        return np.array([e.t_escape for e in self.escape_events])


def _programs_and_funcs(coeffs):
    progs = [compile_program(c.value) for c in coeffs]
    funcs = [scalar_function(c.value) for c in coeffs]
    return progs, funcs


_STATUS = {kernels.OK: "ok", kernels.UNDERFLOW: "step underflow",
           kernels.NONFINITE: "non-finite coefficient", kernels.MAX_STEPS: "step budget exhausted",
           kernels.NO_RETURN: "blow-up without return"}


def _raw(system, coeffs, t_out, y0, mode0, rtol, atol, cap, backend, max_steps, h0=0.0):
    progs, funcs = _programs_and_funcs(coeffs)
    impl = kernels.get_backend(backend)
    return impl.integrate(system, progs, funcs, np.asarray(t_out, dtype=float), list(y0),
                          mode0=mode0, rtol=rtol, atol=atol, cap=cap, h0=h0,
                          max_steps=max_steps)


def _as_grid(grid, r: ReducedRCE) -> TimeGrid:
    if isinstance(grid, TimeGrid):
        return grid
    return TimeGrid.from_samples(grid, r.singular_points)


def integrate_rce(r: ReducedRCE, ic, grid, tol: float = DEFAULT_RTOL,
                  atol: Optional[float] = None, cap: float = ESCAPE_CAP,
                  continue_poles: bool = True, backend: Optional[str] = None,
                  max_steps: int = 2_000_000, strict: bool = True) -> RceTrajectory:
    """Integrate nu' = -w01 nu^2 + w02 from ``ic`` at ``grid[0]`` over the grid.

    ``ic`` may be real, complex or infinite (a pole at the start time).
    With ``continue_poles=False`` the trajectory stops at the first crossing
    of the escape cap; :func:`continue_through_pole` resumes it.
    """
    grid = _as_grid(grid, r)
    atol = tol * 1e-3 if atol is None else atol
    ic = complex(ic)
    if cmath_isinf(ic):
        y0, mode0 = (0.0, 0.0), 1
    elif abs(ic) > cap:
        w = 1.0 / ic
        y0, mode0 = (w.real, w.imag), 1
    else:
        y0, mode0 = (ic.real, ic.imag), 0
    res = _raw(kernels.SYS_RCE, (r.omega01, r.omega02), grid.samples, y0, mode0, tol, atol,
               cap, backend, max_steps)
    traj = _assemble(grid, res, mode0)
    if res["status"] != kernels.OK:
        msg = _STATUS[res["status"]]
        traj.status = msg
        traj.stopped_at = res["status_t"]
        if strict:
            cls = BlowUpError if res["status"] == kernels.NO_RETURN else IntegrationError
            raise cls(msg, res["status_t"])
    if not continue_poles:
        _truncate_at_first_switch(traj, res)
    return traj


def cmath_isinf(z: complex) -> bool:
    return math.isinf(z.real) or math.isinf(z.imag)


def _assemble(grid: TimeGrid, res, mode0) -> RceTrajectory:
    vals = res["values"]
    modes = res["modes"].astype(np.int8)
    state = vals[:, 0] + 1j * vals[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = np.where(modes == 0, state, 1.0 / state)
        w = np.where(modes == 1, state, 1.0 / state)
    # exact pole samples: w == 0 gives an infinite nu; keep the real sign convention
    zero_w = (modes == 1) & (state == 0)
    nu[zero_w] = complex(math.inf, 0.0)
    n_done = res["n_done"]
    nu[n_done:] = np.nan
    w[n_done:] = np.nan
    direction = 1 if grid.t1 >= grid.t0 else -1
    events = [EscapeEvent(float(t), (-1, 1) if s * direction > 0 else (1, -1))
              for t, s in sorted(res["events"], key=lambda e: direction * e[0])]
    log = []
    start, cur = grid.t0, DIRECT if mode0 == 0 else RECIPROCAL
    for t, m in res["switches"]:
        log.append((start, float(t), cur))
        start, cur = float(t), DIRECT if m == 0 else RECIPROCAL
    log.append((start, float(res["status_t"]) if res["status"] else grid.t1, cur))
    return RceTrajectory(grid, nu, events, log, modes, w, "ok", int(res["n_steps"]),
                         int(res["n_rejected"]))


def _truncate_at_first_switch(traj: RceTrajectory, res):
    sw = [t for t, m in res["switches"] if m == 1]
    if not sw:
        return
    ts = sw[0]
    d = 1 if traj.grid.t1 >= traj.grid.t0 else -1
    beyond = (traj.t - ts) * d > 0
    traj.values[beyond] = np.nan
    traj.recip[beyond] = np.nan
    traj.escape_events = []
    traj.variable_log = [(traj.grid.t0, ts, DIRECT)]
    traj.status = "escaped"
    traj.stopped_at = ts


def continue_through_pole(r: ReducedRCE, traj_prefix: RceTrajectory, cap: float = ESCAPE_CAP,
                          tol: float = DEFAULT_RTOL, backend: Optional[str] = None
                          ) -> RceTrajectory:
    """Resume a trajectory stopped at the escape cap, integrating w = 1/nu through
    the pole and on to the end of the original grid."""
    if traj_prefix.status != "escaped":
        return traj_prefix
    valid = np.isfinite(traj_prefix.values)
    last = int(np.nonzero(valid)[0][-1])
    rest = traj_prefix.t[last:]
    cont = integrate_rce(r, traj_prefix.values[last], TimeGrid.from_samples(rest), tol=tol,
                         cap=cap, backend=backend)
    values = np.concatenate([traj_prefix.values[:last], cont.values])
    recip = np.concatenate([traj_prefix.recip[:last], cont.recip])
    modes = np.concatenate([traj_prefix.modes[:last], cont.modes])
    log = traj_prefix.variable_log[:-1] + [(traj_prefix.variable_log[-1][0], rest[0], DIRECT)]
    log += [(max(a, rest[0]) if i == 0 else a, b, m) for i, (a, b, m) in
            enumerate(cont.variable_log)]
    return RceTrajectory(traj_prefix.grid, values, cont.escape_events, log, modes, recip,
                         cont.status, traj_prefix.n_steps + cont.n_steps,
                         traj_prefix.n_rejected + cont.n_rejected)


def detect_escape_events(traj: RceTrajectory) -> list:
    """Escape events of a completed trajectory, sorted by time."""
    return sorted(traj.escape_events, key=lambda e: e.t_escape)


# --------------------------------------------------------------------------
# companion integrators used by the primitive and Floquet modules

@dataclass
class PolarTrajectory:
    """Complex RCE solution nuR + j exp(ell), with phase = integral of w01*exp(ell)."""

    t: np.ndarray
    nuR: np.ndarray
    ell: np.ndarray
    phase: np.ndarray

    @property
    def nuIm(self) -> np.ndarray:
        return np.exp(self.ell)


def integrate_polar(r: ReducedRCE, ic: complex, grid, tol: float = 1e-11,
                    atol: Optional[float] = None, backend: Optional[str] = None,
                    max_steps: int = 2_000_000) -> PolarTrajectory:
    """Integrate a non-real solution in log-polar form (keeps relative accuracy
    of a tiny imaginary part).  Phase is zero at ``grid[0]``."""
    samples = grid.samples if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    ic = complex(ic)
    if ic.imag <= 0.0:
        raise ValueError("polar integration needs Im(ic) > 0")
    atol = tol if atol is None else atol
    res = _raw(kernels.SYS_POLAR, (r.omega01, r.omega02), samples,
               (ic.real, math.log(ic.imag), 0.0), 0, tol, atol, math.inf, backend, max_steps)
    if res["status"] != kernels.OK:
        raise IntegrationError(_STATUS[res["status"]], res["status_t"])
    v = res["values"]
    return PolarTrajectory(samples.copy(), v[:, 0].copy(), v[:, 1].copy(), v[:, 2].copy())


def integrate_state(m: StateMatrix2x2, grid, phi0=None, tol: float = 1e-11,
                    atol: Optional[float] = None, backend: Optional[str] = None,
                    max_steps: int = 2_000_000) -> np.ndarray:
    """Integrate Phi' = A(t) Phi; returns an array of shape (n, 2, 2)."""
    samples = grid.samples if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    phi0 = np.eye(2) if phi0 is None else np.asarray(phi0, dtype=float)
    atol = tol if atol is None else atol
    res = _raw(kernels.SYS_LIN2, m.entries(), samples, phi0.ravel(), 0, tol, atol, math.inf,
               backend, max_steps)
    if res["status"] != kernels.OK:
        raise IntegrationError(_STATUS[res["status"]], res["status_t"])
    return res["values"].reshape(-1, 2, 2)


def integrate_scalar(s, y0: float, dy0: float, grid, **kw) -> tuple[np.ndarray, np.ndarray]:
    """Integrate y'' + r1 y' + r0 y = 0 via the companion form; returns (y, y')."""
    from .reduction import companion
    phi = integrate_state(companion(s), grid, np.array([[y0, 0.0], [dy0, 0.0]]), **kw)
    return phi[:, 0, 0], phi[:, 1, 0]
