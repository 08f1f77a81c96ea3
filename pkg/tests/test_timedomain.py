import math

import numpy as np
import pytest

from rcekit.cases import (make_bessel, make_mathieu, make_qho, oracle_hermite_wavefunction)
from rcekit.family import phase_accumulator
from rcekit.odeengine import TimeGrid, integrate_scalar
from rcekit.primitive import autonomous_pair, complex_pair_from, floquet_pair
from rcekit.reduction import ScalarSystem, reduce
from rcekit.timedomain import (TimeDomainError, abel_determinant, dynamic_eigenvalues,
                               envelope_g, fit_time_domain, fundamental_matrix,
                               matrix_residual, reconstruct_time_domain, source_residual)

CONST = ScalarSystem("0", "-4")      # y'' = 4 y


@pytest.fixture
def const_setup():
    r = reduce(CONST)
    pair = autonomous_pair(r, TimeGrid.uniform(0.0, 2.0, 801))
    return r, pair, phase_accumulator(r, pair)


def test_constant_eigenvalues(const_setup):
    r, pair, phi = const_setup
    l1, l2 = dynamic_eigenvalues(r, pair, phi)
    assert np.all(l1.values == 2.0) and np.all(l2.values == -2.0)


def test_constant_reconstruction(const_setup):
    r, pair, phi = const_setup
    g = envelope_g(r, pair, phi)
    np.testing.assert_allclose(g, 1 / math.sqrt(2), rtol=1e-15)
    td = reconstruct_time_domain(r, pair, phi, "cosh")
    np.testing.assert_allclose(td.y, np.cosh(2 * pair.t) / math.sqrt(2), rtol=1e-13)
    np.testing.assert_allclose(td.dy, 2 * np.sinh(2 * pair.t) / math.sqrt(2), atol=1e-12)
    assert np.max(source_residual(CONST, pair.t, td.y)) < 1e-7


def test_branch_kind_mismatch(const_setup):
    r, pair, phi = const_setup
    with pytest.raises(TimeDomainError):
        reconstruct_time_domain(r, pair, phi, "cos")


def test_fit_time_domain(const_setup):
    r, pair, phi = const_setup
    td = fit_time_domain(r, pair, phi, 1.0, -1.0, 0.0)
    assert td.branch == "cosh"
    a, b = 0.25, 0.75
    np.testing.assert_allclose(td.y, a * np.exp(2 * pair.t) + b * np.exp(-2 * pair.t),
                               rtol=1e-10)
    td = fit_time_domain(r, pair, phi, 0.0, 1.0, 0.0)
    assert td.branch == "sinh"
    assert fit_time_domain(r, pair, phi, 1.0, -3.0, 0.0).branch == "sinh"
    np.testing.assert_allclose(td.y, 0.5 * np.sinh(2 * pair.t), atol=1e-12)


def test_fundamental_matrix_constant(const_setup):
    r, pair, phi = const_setup
    fm = fundamental_matrix(CONST, r, pair, phi)
    np.testing.assert_allclose(fm.V[0], [[1, 1], [2, -2]])
    np.testing.assert_allclose(fm.det(), -4.0, rtol=1e-10)
    assert np.max(matrix_residual(CONST, fm)) < 1e-8
    abel = abel_determinant(CONST, pair.t)
    np.testing.assert_allclose(fm.det() / fm.det()[0], abel, rtol=1e-10)


def test_mathieu_fundamental_matrix_and_abel():
    s = make_mathieu(1.0, 1.0)
    r = reduce(s).with_period(2 * math.pi)
    pair = floquet_pair(r, TimeGrid.uniform(0.0, 4 * math.pi, 2401))
    phi = phase_accumulator(r, pair)
    fm = fundamental_matrix(s, r, pair, phi)
    assert np.max(matrix_residual(s, fm)) < 1e-5
    d = fm.det()
    np.testing.assert_allclose(d / d[0], 1.0, atol=1e-6)


def test_mathieu_member_matches_direct_integration():
    s = make_mathieu(1.0, 1.0)
    r = reduce(s).with_period(2 * math.pi)
    pair = floquet_pair(r, TimeGrid.uniform(0.0, 2 * math.pi, 1201))
    phi = phase_accumulator(r, pair)
    td = fit_time_domain(r, pair, phi, 1.0, 0.25, 0.0)
    y, dy = integrate_scalar(s, 1.0, 0.25, pair.t)
    np.testing.assert_allclose(td.y, y, rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(td.dy, dy, rtol=1e-7, atol=1e-9)


def test_qho_ground_state_shape():
    s = make_qho(5)
    r = reduce(s)
    pair = complex_pair_from(r, TimeGrid.uniform(-4.0, 4.0, 4001), 0.0, complex(0, math.sqrt(5)))
    phi = phase_accumulator(r, pair, 0.0)
    td = reconstruct_time_domain(r, pair, phi, "cos")
    ref = oracle_hermite_wavefunction(2, pair.t)
    i0 = int(np.argmin(np.abs(pair.t)))
    scale = ref[i0] / td.y[i0]
    assert np.max(np.abs(scale * td.y - ref)) / np.max(np.abs(ref)) < 1e-6
