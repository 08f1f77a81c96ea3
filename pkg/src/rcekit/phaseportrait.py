"""Phase-portrait classification of the RCE: attractor and separatrix for real
pairs, repetitive escape for imaginary pairs, sign predisposition and the
RCE transient."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .numerics import chordal
from .odeengine import IntegrationError, RceTrajectory, TimeGrid, integrate_rce
from .primitive import PrimitivePair
from .reduction import ReducedRCE

DEFAULT_EPS = 1e-3


class TransientError(RuntimeError):
    """The solution never settles into the band around the attractor."""


@dataclass
class ProbeResult:
    ic: float
    side: str               # above | below (relative to the separatrix); "" for imaginary
    events: list
    transient_time: Optional[float]
    converged: bool


@dataclass
class PortraitReport:
    kind: str                       # attractor_separatrix | repetitive_escape | degenerate
    attractor: Optional[np.ndarray]
    separatrix: Optional[np.ndarray]
    predisposition: str
    transient_time: Optional[float]
    status: str = "confirmed"       # confirmed | inconclusive
    probes: list = field(default_factory=list)
    event_cadence: Optional[float] = None
    attractor_events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "status": self.status, "predisposition": self.predisposition,
            "transient_time": self.transient_time, "event_cadence": self.event_cadence,
            "attractor_events": list(self.attractor_events),
            "probes": [vars(p) for p in self.probes],
        }


def sign_predisposition(r: ReducedRCE, window, samples: int = 1024) -> str:
    """stable-capable when w01 and w02 share a sign throughout, escape-predisposed
    when -w01 and w02 share a sign throughout (nu' then never changes sign)."""
    lo, hi = min(window), max(window)
    t = np.linspace(lo, hi, samples)
    with np.errstate(all="ignore"):
        a = np.asarray(r.omega01(t)) * np.ones_like(t)
        b = np.asarray(r.omega02(t)) * np.ones_like(t)
    ok = np.isfinite(a) & np.isfinite(b)
    p = np.sign(a[ok]) * np.sign(b[ok])
    if p.size and np.all(p > 0):
        return "stable-capable"
    if p.size and np.all(p < 0):
        return "escape-predisposed"
    return "mixed"


def _band_exit(t, nu, att, eps):
    """Duration from t[0] after which |nu - att| < eps (1 + |att|) holds to the end."""
    with np.errstate(invalid="ignore"):
        dev = np.abs(nu - att) - eps * (1.0 + np.abs(att))
    outside = ~(dev < 0)
    if outside[-1]:
        return None
    if not outside.any():
        return 0.0
    i = int(np.nonzero(outside)[0][-1])
    t_in = t[i + 1]
    if np.isfinite(dev[i]):
        # linear refinement of the crossing
        t_in = t[i] + (t[i + 1] - t[i]) * dev[i] / (dev[i] - dev[i + 1])
    return float(abs(t_in - t[0]))


def measure_rce_transient(r: ReducedRCE, pair: PrimitivePair, ic: float,
                          eps: float = DEFAULT_EPS, tol: float = 1e-11) -> float:
    """Time from the window start until nu stays within eps (1+|attractor|) of the attractor."""
    if pair.kind != "real":
        raise TransientError("the RCE transient is defined for real primitive pairs only")
    traj = integrate_rce(r, ic, pair.grid, tol=tol)
    out = _band_exit(pair.t, traj.values.real, pair.plus, eps)
    if out is None:
        raise TransientError("the solution does not settle near the attractor within the window")
    return out


def default_probe_ics(pair: PrimitivePair) -> list[float]:
    """separatrix +/- d, attractor +/- d and +/- 5|nu_I| at the window start, d = 0.1|nu_I|."""
    nuR, nuI = float(pair.nuR[0]), abs(float(pair.nuI[0]))
    d = 0.1 * nuI
    if pair.kind == "real":
        att, sep = nuR + nuI, nuR - nuI
        return [sep + d, sep - d, att + d, att - d, 5.0 * nuI, -5.0 * nuI]
    return [nuR + d, nuR - d, nuR + 5.0 * nuI, nuR - 5.0 * nuI]


def _run_probe(r, grid, ic, tol):
    try:
        return integrate_rce(r, ic, grid, tol=tol)
    except IntegrationError as exc:
        return exc


def classify_portrait(r: ReducedRCE, pair: PrimitivePair, window=None,
                      probe_ics: Optional[Sequence[float]] = None, eps: float = DEFAULT_EPS,
                      tol: float = 1e-10, threads: int = 4) -> PortraitReport:
    """Classify the portrait over the pair's grid (``window`` is accepted for
    symmetry with the other entry points and must match the grid if given)."""
    t = pair.t
    if window is not None and (abs(min(window) - min(t[0], t[-1])) > 1e-9 * (1 + abs(t[0]))):
        raise ValueError("window does not match the pair's grid")
    pred = sign_predisposition(r, (t[0], t[-1]))
    finite = pair.nuI[np.isfinite(pair.nuI)]
    if finite.size == 0 or np.max(np.abs(finite)) <= 1e-12:
        return PortraitReport("degenerate", None, None, pred, None, "confirmed")
    ics = default_probe_ics(pair) if probe_ics is None else list(probe_ics)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        trajs = list(ex.map(lambda ic: _run_probe(r, pair.grid, ic, tol), ics))

    if pair.kind == "imaginary":
        probes, gaps = [], []
        for ic, tr in zip(ics, trajs):
            if isinstance(tr, Exception):
                probes.append(ProbeResult(ic, "", [], None, False))
                continue
            ev = list(tr.event_times())
            probes.append(ProbeResult(ic, "", ev, None, False))
            if len(ev) >= 2:
                gaps.extend(np.diff(ev).tolist())
        escaping = sum(len(p.events) >= 1 for p in probes)
        status = "confirmed" if escaping == len(probes) else "inconclusive"
        cadence = float(np.mean(gaps)) if gaps else None
        return PortraitReport("repetitive_escape", None, None, pred, None, status, probes,
                              cadence)

    att, sep = pair.plus, pair.minus
    probes = []
    ok = True
    worst_transient = 0.0
    for ic, tr in zip(ics, trajs):
        side = "above" if ic > sep[0] else "below"
        if isinstance(tr, Exception):
            probes.append(ProbeResult(ic, side, [], None, False))
            ok = False
            continue
        ev = list(tr.event_times())
        if pair.has_poles:
            # attractor itself escapes: compare in the chordal chart
            tail = slice(int(0.8 * (len(t) - 1)), None)
            d = float(np.max(chordal(tr.values.real[tail], att[tail])))
            trans = None
            conv = d <= max(eps, 1e-6)
        else:
            trans = _band_exit(t, tr.values.real, att, eps)
            conv = trans is not None
            expected = 0 if side == "above" else 1
            if conv and len(ev) != expected:
                conv = False
            if side == "below" and not conv and len(ev) == 1:
                # escaped but the window ended before convergence
                conv = False
        probes.append(ProbeResult(ic, side, ev, trans, conv))
        ok &= conv
        if trans is not None:
            worst_transient = max(worst_transient, trans)
    att_events = list(pair.diagnostics.get("attractor_events", []))
    cadence = float(np.mean(np.diff(att_events))) if len(att_events) >= 2 else None
    return PortraitReport("attractor_separatrix", att, sep, pred,
                          worst_transient if ok and not pair.has_poles else None,
                          "confirmed" if ok else "inconclusive", probes, cadence, att_events)
