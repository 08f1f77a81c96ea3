import math

import numpy as np
import pytest

from rcekit.cases import make_mathieu
from rcekit.family import fit_branch_and_K, phase_accumulator
from rcekit.floquet import (FloquetError, check_coefficients_periodic, check_rce_periodicity,
                            dc_average, floquet_exponents)
from rcekit.odeengine import TimeGrid, integrate_rce
from rcekit.primitive import floquet_pair
from rcekit.reduction import reduce

T = 2 * math.pi


def _setup(a0, q=1.0, periods=6, n=4001):
    s = make_mathieu(a0, q)
    r = reduce(s).with_period(T)
    pair = floquet_pair(r, TimeGrid.uniform(0.0, periods * T, n))
    return s, r, pair


def test_dc_average():
    assert dc_average(lambda t: 3 + np.cos(t), T) == pytest.approx(3.0, abs=1e-13)
    t = np.linspace(0, 2 * T, 801)
    assert dc_average(1 + np.sin(t) ** 2, T, t, 2 * np.sin(t) * np.cos(t)) == \
        pytest.approx(1.5, abs=1e-9)
    with pytest.raises(FloquetError):
        dc_average(t, 3 * T, t)


def test_coefficient_period_check():
    r = reduce(make_mathieu(1.0, 1.0))
    assert check_coefficients_periodic(r, T) < 1e-12
    with pytest.raises(FloquetError):
        check_coefficients_periodic(r, 3.0)


def test_real_exponents():
    s, r, pair = _setup(1.0)
    fr = floquet_exponents(s, r, pair, T)
    assert fr.route == "dc" and pair.kind == "real"
    assert fr.r1.real == pytest.approx(-fr.r2.real, abs=1e-9)
    assert fr.r1.real == pytest.approx(0.94255, abs=1e-4)
    assert abs(np.prod(fr.multipliers) - 1.0) < 1e-6
    assert abs(fr.checks["dc_nuR"]) < 1e-8
    assert fr.checks["modulus_error"] < 1e-4
    assert fr.Q_periodic.periodic and fr.rce_periodic.periodic


def test_imaginary_exponents():
    s, r, pair = _setup(-3.0)
    fr = floquet_exponents(s, r, pair, T)
    assert pair.kind == "imaginary"
    assert np.all(np.abs(np.abs(fr.multipliers) - 1.0) < 1e-4)
    assert abs(fr.checks["dc_intrinsic"] - math.sqrt(3)) / math.sqrt(3) < 0.02
    assert fr.checks["modulus_error"] < 1e-4


def test_monodromy_route_negative_multipliers():
    s, r, pair = _setup(0.0)
    fr = floquet_exponents(s, r, pair, T)
    assert fr.route == "monodromy"
    assert fr.checks["pi_over_T_shift"]
    assert fr.r1.imag == pytest.approx(0.5, abs=1e-9)


def test_family_member_not_periodic_but_attractor_is():
    s, r, pair = _setup(1.0)
    v = check_rce_periodicity(pair.plus, T, pair.t)
    assert v.periodic
    phi = phase_accumulator(r, pair)
    f = fit_branch_and_K(pair, phi, float(pair.nuR[0]), 0.0)
    v = check_rce_periodicity(f, T)
    assert not v.periodic or v.deviation > 1e-12   # converges toward the attractor


def test_trajectory_input_and_short_window():
    s, r, pair = _setup(1.0, periods=2, n=1201)
    tr = integrate_rce(r, float(pair.plus[0]), pair.grid)
    v = check_rce_periodicity(tr, T, min_periods=1.0)
    assert v.periodic
    assert not check_rce_periodicity(tr, T).periodic   # shorter than 3 periods


def test_to_dict_serializable():
    import json
    s, r, pair = _setup(1.0, periods=2, n=1201)
    json.dumps(floquet_exponents(s, r, pair, T).to_dict())
