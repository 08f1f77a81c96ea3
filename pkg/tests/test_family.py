import math

import numpy as np
import pytest

from rcekit.cases import make_polynomial_case, polynomial_closed_form
from rcekit.family import (FamilyError, FamilySolution, branch_function, fit_branch_and_K,
                           general_pair, general_z_solution, k0_form, phase_accumulator,
                           riccati_residual)
from rcekit.odeengine import TimeGrid, integrate_rce
from rcekit.primitive import anchored_real_pair, autonomous_pair
from rcekit.reduction import GeneralRiccati, reduce

ESCAPE = 0.25 * math.log(5.0)


@pytest.fixture
def const_phi(const_r, const_pair):
    return phase_accumulator(const_r, const_pair)


def test_phase_constant(const_phi, const_pair):
    np.testing.assert_allclose(const_phi.phi_f, 2.0 * const_pair.t, atol=1e-13)


def test_trichotomy(const_pair, const_phi):
    f = fit_branch_and_K(const_pair, const_phi, 0.0, 0.0)
    assert f.branch == "tanh" and f.K == 0.0
    f = fit_branch_and_K(const_pair, const_phi, 3.0, 0.0)
    assert f.branch == "coth" and f.K == pytest.approx(-math.atanh(2 / 3))
    f = fit_branch_and_K(const_pair, const_phi, -3.0, 0.0)
    assert f.branch == "coth" and f.K == pytest.approx(math.atanh(2 / 3))
    assert fit_branch_and_K(const_pair, const_phi, 2.0, 0.0).branch == "primitive_plus"
    assert fit_branch_and_K(const_pair, const_phi, -2.0, 0.0).branch == "primitive_minus"
    f = fit_branch_and_K(const_pair, const_phi, math.inf, 0.0)
    assert f.branch == "coth" and f.K == 0.0


def test_escape_time_from_family(const_pair, const_phi):
    f = fit_branch_and_K(const_pair, const_phi, -3.0, 0.0)
    ev = f.escape_times()
    assert len(ev) == 1 and abs(ev[0] - ESCAPE) < 1e-10


def test_member_matches_integration(const_r, const_pair, const_phi):
    f = fit_branch_and_K(const_pair, const_phi, -3.0, 0.0)
    tr = integrate_rce(const_r, -3.0, const_pair.grid)
    ok = np.abs(const_pair.t - ESCAPE) > 0.01
    np.testing.assert_allclose(f.values()[ok], tr.values.real[ok], rtol=1e-7)


def test_k0_form_equals_branch(const_pair, const_phi):
    for ic in (0.5, 3.0, -3.0):
        f = fit_branch_and_K(const_pair, const_phi, ic, 0.0)
        v = k0_form(const_pair, const_phi, f.K0)
        ok = np.isfinite(f.values()) & (np.abs(f.values()) < 1e6)
        np.testing.assert_allclose(v[ok], f.values()[ok], rtol=1e-9, atol=1e-12)


def test_polynomial_constant_C():
    g = make_polynomial_case()
    r = reduce(g)
    grid = TimeGrid.uniform(1.0, 10.0, 901, (0.0,))
    pair = anchored_real_pair(r, grid)
    phi = phase_accumulator(r, pair)   # phi = 3/2 ln t, zero at t = 1
    for C in (0.3, -0.5, 4.0, -7.0):
        z1 = float(polynomial_closed_form(1.0, C))
        f = fit_branch_and_K(pair, phi, z1, 1.0)
        z = general_z_solution(r, f).values()
        np.testing.assert_allclose(z, polynomial_closed_form(grid.samples, C), rtol=1e-7)
        assert f.C == pytest.approx(C, rel=1e-7)


def test_general_pair_is_primitive_pair(const_r, const_pair, const_phi):
    nuRx, nuIx = general_pair(const_r, const_pair, const_phi, -0.5)
    t = const_pair.t
    plus, minus = nuRx + nuIx, nuRx - nuIx
    x = 2 * t + 0.5
    np.testing.assert_allclose(plus, 2 * np.tanh(x), rtol=1e-6)
    np.testing.assert_allclose(minus, 2 / np.tanh(x), rtol=1e-6)


def test_branch_validation(const_pair, const_phi):
    with pytest.raises(FamilyError):
        FamilySolution(const_pair, "cot", 0.0, const_phi)
    assert branch_function("tan", 0.3) == pytest.approx(-math.tan(0.3))


def test_imaginary_family():
    r = reduce(GeneralRiccati("-1", "0", "-9"))
    pair = autonomous_pair(r, TimeGrid.uniform(0.0, 2.0, 2001))
    phi = phase_accumulator(r, pair)
    f = fit_branch_and_K(pair, phi, 1.0, 0.0)
    assert f.branch == "cot"
    ev = f.escape_times()
    np.testing.assert_allclose(np.diff(ev), math.pi / 3, rtol=1e-10)
    # nu = 3 cot(3(t - t*)) through 1 at t = 0
    t0 = -math.atan(3.0) / 3.0
    assert ev[0] == pytest.approx(t0 + math.pi / 3, rel=1e-10)


def test_riccati_residual(const_pair, const_phi):
    g = GeneralRiccati("-1", "0", "4")
    f = fit_branch_and_K(const_pair, const_phi, -3.0, 0.0)
    res = riccati_residual(g, const_pair.t, f.values())
    assert np.nanmax(res) < 1e-6


def test_phase_undefined_with_poles(const_r, const_pair):
    bad = type(const_pair)(const_pair.grid, const_pair.nuR, -const_pair.nuI, "real",
                           const_pair.dnuR, const_pair.dnuI)
    with pytest.raises(FamilyError):
        phase_accumulator(const_r, bad)
