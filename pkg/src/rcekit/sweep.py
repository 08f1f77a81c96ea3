"""Parameter sweeps over a case family (mainly Mathieu (a0, q) grids).

Each grid point runs reduction, primitive pair, portrait and Floquet analysis
in isolation; rows come back in grid order whatever the completion order.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cases import case_spec
from .floquet import floquet_exponents
from .odeengine import TimeGrid
from .phaseportrait import classify_portrait, sign_predisposition
from .primitive import primitive_pair
from .reduction import reduce

LABELS = ("attractor", "attractor_periodic_escape", "no_attractor_bounded",
          "repetitive_escape")

COLUMNS = ["params", "status", "label", "pair_kind", "portrait_kind", "predisposition",
           "dc_intrinsic", "r1", "r2", "multipliers", "escape_cadence", "rce_periodic",
           "rce_deviation", "product_error", "message"]


@dataclass(frozen=True)
class SweepSpec:
    case: str = "mathieu"
    axes: dict = field(default_factory=dict)     # name -> list of values
    fixed: dict = field(default_factory=dict)
    n_periods: int = 6
    samples_per_period: int = 600
    tol: float = 1e-12
    refine_axis: Optional[str] = None
    refine_resolution: float = 1e-3

    def __post_init__(self):
        if not self.axes:
            raise ValueError("sweep grid is empty")
        for k, v in self.axes.items():
            if len(v) == 0:
                raise ValueError(f"axis {k!r} is empty")

    @staticmethod
    def linspace(lo: float, hi: float, count: int) -> list:
        return [float(x) for x in np.linspace(lo, hi, int(count))]

    def points(self) -> list[dict]:
        names = list(self.axes)
        out = []
        for combo in itertools.product(*(self.axes[n] for n in names)):
            p = dict(self.fixed)
            p.update({n: float(v) for n, v in zip(names, combo)})
            out.append(p)
        return out


@dataclass
class SweepRow:
    params: dict
    status: str                      # ok | inconclusive | error
    label: Optional[str] = None
    pair_kind: Optional[str] = None
    portrait_kind: Optional[str] = None
    predisposition: Optional[str] = None
    dc_intrinsic: Optional[float] = None
    r1: Optional[list] = None
    r2: Optional[list] = None
    multipliers: Optional[list] = None
    escape_cadence: Optional[float] = None
    rce_periodic: Optional[bool] = None
    rce_deviation: Optional[float] = None
    product_error: Optional[float] = None
    message: str = ""


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def run_point(case: str, params: dict, n_periods: int = 6, samples_per_period: int = 600,
              tol: float = 1e-12) -> SweepRow:
    """Full pipeline for one grid point; errors are recorded in the row."""
    try:
        spec = case_spec(case, **params)
        sysm = spec.build()
        T = spec.period if spec.period is not None else 2.0 * math.pi
        r = reduce(sysm)
        if spec.period is not None:
            r = r.with_period(T)
        t0 = spec.window[0]
        grid = TimeGrid.uniform(t0, t0 + n_periods * T, n_periods * samples_per_period + 1)
        pair = primitive_pair(r, grid)
        fr = floquet_exponents(sysm, r, pair, T, tol=tol)
        rep = classify_portrait(r, pair, threads=1)
        pred = sign_predisposition(r, (t0, t0 + T))
    except Exception as exc:   # recorded, never raised
        return SweepRow(dict(params), "error", message=f"{type(exc).__name__}: {exc}")
    if pair.kind == "real":
        escapes = pair.has_poles or any(m.real < 0 for m in np.asarray(fr.multipliers, complex))
        label = "attractor_periodic_escape" if escapes else "attractor"
    else:
        label = "repetitive_escape" if pred == "escape-predisposed" else "no_attractor_bounded"
    dc_i = fr.checks.get("dc_intrinsic")
    if dc_i is None:
        dc_i = float(abs(complex(fr.r1).real - complex(fr.r2).real)) / 2.0
    status = "ok" if rep.status == "confirmed" else "inconclusive"
    rce = fr.rce_periodic
    return SweepRow(dict(params), status, label, pair.kind, rep.kind, pred, float(dc_i),
                    _c(fr.r1), _c(fr.r2), [_c(m) for m in fr.multipliers], rep.event_cadence,
                    None if rce is None else bool(rce.periodic),
                    None if rce is None else float(rce.deviation),
                    float(fr.checks["product_error"]), "")


def _run(args):
    return run_point(*args)


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    """One row per grid point, in grid order."""
    jobs = [(spec.case, p, spec.n_periods, spec.samples_per_period, spec.tol)
            for p in spec.points()]
    if threads <= 1 or len(jobs) == 1:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_run, jobs))


def _attracts(row: SweepRow) -> Optional[bool]:
    return None if row.pair_kind is None else row.pair_kind == "real"


def refine_boundaries(spec: SweepSpec, rows: Sequence[SweepRow],
                      axis: Optional[str] = None, resolution: Optional[float] = None,
                      max_iter: int = 60) -> list[dict]:
    """Bisect between neighbouring points where the attractor verdict flips.

    Only meaningful for a single-axis sweep (or the named axis with the others
    fixed); returns measured boundaries with their bracket.
    """
    axis = axis or spec.refine_axis or next(iter(spec.axes))
    res = resolution or spec.refine_resolution
    out = []
    for a, b in zip(rows, rows[1:]):
        fa, fb = _attracts(a), _attracts(b)
        if fa is None or fb is None or fa == fb:
            continue
        if any(a.params[k] != b.params[k] for k in a.params if k != axis):
            continue
        lo, hi = a.params[axis], b.params[axis]
        it = 0
        while abs(hi - lo) > res and it < max_iter:
            mid = 0.5 * (lo + hi)
            p = dict(a.params)
            p[axis] = mid
            fm = _attracts(run_point(spec.case, p, spec.n_periods, spec.samples_per_period,
                                     spec.tol))
            if fm is None:
                break
            if fm == fa:
                lo = mid
            else:
                hi = mid
            it += 1
        out.append({"axis": axis, "boundary": 0.5 * (lo + hi), "bracket": [lo, hi],
                    "from_attractor": fa, "fixed": {k: v for k, v in a.params.items()
                                                    if k != axis}})
    return out


def _cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return "" if v is None else str(v)


def rows_to_csv(rows: Sequence[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        d = asdict(r)
        w.writerow([_cell(d[c]) for c in COLUMNS])


def rows_to_jsonl(rows: Sequence[SweepRow], fh) -> None:
    for r in rows:
        fh.write(json.dumps(asdict(r), separators=(",", ":")) + "\n")
