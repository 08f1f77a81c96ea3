import math

import numpy as np
import pytest

from rcekit.cases import (CASES, CaseError, bessel_zeros, build_case, case_spec,
                          hermite_polynomial, make_bessel, make_mathieu, make_qho,
                          oracle_bessel_first_kind, oracle_hermite_wavefunction,
                          polynomial_closed_form)

# reference values of J0, J5 and zeros (standard tables)
J5_ZEROS = [8.771483815959954, 12.338604197466944, 15.700174079711671, 18.980133875179921]


def test_bessel_series_values():
    assert oracle_bessel_first_kind(0, 1.0) == pytest.approx(0.7651976865579666, abs=1e-15)
    assert oracle_bessel_first_kind(5, 10.0) == pytest.approx(-0.23406152818679365, abs=1e-13)
    np.testing.assert_allclose(bessel_zeros(5, 20.0), J5_ZEROS, atol=1e-11)


def test_bessel_series_satisfies_ode():
    t = np.linspace(1.0, 15.0, 1401)
    y = oracle_bessel_first_kind(5, t)
    from rcekit.timedomain import source_residual
    assert np.max(source_residual(make_bessel(5), t, y)) < 1e-6   # stencil truncation


def test_hermite():
    t = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(hermite_polynomial(3, t), 8 * t ** 3 - 12 * t)
    from rcekit.timedomain import source_residual
    tt = np.linspace(-4, 4, 801)
    assert np.max(source_residual(make_qho(5), tt, oracle_hermite_wavefunction(2, tt))) < 1e-7


def test_polynomial_closed_form():
    t = np.linspace(1.0, 3.0, 5)
    np.testing.assert_allclose(polynomial_closed_form(t, 0.0), 2 / t)


def test_validation():
    with pytest.raises(CaseError):
        make_qho(4)
    with pytest.raises(CaseError):
        make_bessel(0)
    with pytest.raises(CaseError):
        case_spec("nope")


def test_registry():
    assert set(CASES) == {"bessel", "qho", "mathieu", "polynomial", "constant"}
    sysm, spec = build_case("mathieu", a0=1.0, q=1.0)
    assert spec.period == pytest.approx(2 * math.pi)
    assert sysm.r0(0.0) == pytest.approx(-2.0)
    assert case_spec("mathieu", a0=1.0, q=0.0).period is None
    assert case_spec("bessel").window[0] > 0
