import math

import numpy as np
import pytest

from rcekit.cases import make_bessel, make_mathieu
from rcekit.odeengine import TimeGrid
from rcekit.phaseportrait import (TransientError, classify_portrait, default_probe_ics,
                                  measure_rce_transient, sign_predisposition)
from rcekit.primitive import anchored_real_pair, autonomous_pair, floquet_pair
from rcekit.reduction import GeneralRiccati, reduce


def test_constant_portrait(const_r):
    pair = autonomous_pair(const_r, TimeGrid.uniform(0.0, 10.0, 2001))
    rep = classify_portrait(const_r, pair)
    assert rep.kind == "attractor_separatrix" and rep.status == "confirmed"
    assert np.all(rep.attractor == 2.0) and np.all(rep.separatrix == -2.0)
    below = [p for p in rep.probes if p.side == "below"]
    assert all(len(p.events) == 1 for p in below)
    assert rep.predisposition == "stable-capable"


def test_transient(const_r):
    pair = autonomous_pair(const_r, TimeGrid.uniform(0.0, 10.0, 4001))
    # |2 tanh(2t) - 2| < 3e-3 once tanh(2t) > 1 - 1.5e-3
    expect = math.atanh(1 - 1.5e-3) / 2
    assert measure_rce_transient(const_r, pair, 0.0) == pytest.approx(expect, abs=1e-4)
    assert measure_rce_transient(const_r, pair, 2.0) == 0.0


def test_transient_imaginary_rejected():
    r = reduce(GeneralRiccati("-1", "0", "-4"))
    pair = autonomous_pair(r, TimeGrid.uniform(0.0, 5.0, 101))
    with pytest.raises(TransientError):
        measure_rce_transient(r, pair, 0.0)


def test_polynomial_portrait(poly_r):
    pair = anchored_real_pair(poly_r, TimeGrid.uniform(1.0, 20.0, 1901, (0.0,)))
    rep = classify_portrait(poly_r, pair)
    assert rep.status == "confirmed"
    assert rep.attractor[-1] == pytest.approx(0.1, rel=1e-7)
    assert rep.separatrix[-1] == pytest.approx(-0.05, rel=1e-7)


def test_imaginary_repetitive_escape():
    r = reduce(make_mathieu(-3.0, 1.0)).with_period(2 * math.pi)
    pair = floquet_pair(r, TimeGrid.uniform(0.0, 12 * math.pi, 3001))
    rep = classify_portrait(r, pair)
    assert rep.kind == "repetitive_escape" and rep.status == "confirmed"
    assert rep.predisposition == "escape-predisposed"
    assert all(len(p.events) >= 5 for p in rep.probes)


def test_attractor_with_poles_has_period_cadence():
    r = reduce(make_mathieu(0.0, 1.0)).with_period(2 * math.pi)
    pair = floquet_pair(r, TimeGrid.uniform(0.0, 6 * 2 * math.pi, 3601))
    rep = classify_portrait(r, pair)
    assert rep.kind == "attractor_separatrix"
    assert rep.event_cadence == pytest.approx(2 * math.pi, rel=1e-6)


def test_predisposition():
    assert sign_predisposition(reduce(make_mathieu(-3, 1)), (0, 7)) == "escape-predisposed"
    assert sign_predisposition(reduce(make_mathieu(3, 1)), (0, 7)) == "stable-capable"
    assert sign_predisposition(reduce(make_mathieu(0, 1)), (0, 7)) == "mixed"


def test_default_probes(const_pair):
    ics = default_probe_ics(const_pair)
    assert ics == pytest.approx([-1.8, -2.2, 2.2, 1.8, 10.0, -10.0])
