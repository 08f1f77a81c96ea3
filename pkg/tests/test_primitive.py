import math

import numpy as np
import pytest

from rcekit.cases import make_bessel, make_mathieu, make_polynomial_case
from rcekit.odeengine import TimeGrid, integrate_rce
from rcekit.primitive import (NoAttractor, PrimitiveError, anchored_real_pair, autonomous_pair,
                              complementary_of, conjugate_check, decompose_to_primitive,
                              find_primitive_backward, find_primitive_forward, floquet_pair,
                              pole_mask, primitive_pair, solution_residual, wkb_guess)
from rcekit.reduction import GeneralRiccati, reduce


def test_autonomous_pair(const_pair):
    assert const_pair.kind == "real"
    assert np.all(const_pair.plus == 2.0) and np.all(const_pair.minus == -2.0)


def test_autonomous_imaginary():
    r = reduce(GeneralRiccati("-1", "0", "-9"))
    p = autonomous_pair(r, TimeGrid.uniform(0, 1, 11))
    assert p.kind == "imaginary" and np.all(p.nuI == 3.0) and np.all(p.nuR == 0.0)


def test_polynomial_anchored(poly_r):
    t = TimeGrid.uniform(1.0, 20.0, 1901, (0.0,))
    p = anchored_real_pair(poly_r, t)
    s = t.samples
    np.testing.assert_allclose(p.nuR, 1 / (2 * s), rtol=1e-7)
    np.testing.assert_allclose(p.nuI, 3 / (2 * s), rtol=1e-7)


def test_primitive_pair_shortcut_real(poly_r):
    p = primitive_pair(poly_r, (1.0, 10.0), n=901)
    assert p.kind == "real"
    assert np.max(p.eq9_residual(poly_r)) < 1e-6


def test_forward_probe_converges(poly_r):
    out = find_primitive_forward(poly_r, window=(1.0, 60.0), n=3001, pair=False)
    assert not isinstance(out, NoAttractor)


def test_forward_probe_no_attractor():
    r = reduce(make_mathieu(-3.0, 1.0)).with_period(2 * math.pi)
    out = find_primitive_forward(r, window=(0.0, 12 * math.pi), n=3001, pair=False)
    assert isinstance(out, NoAttractor)


def test_wkb_guess_requires_negative_ratio(poly_r):
    with pytest.raises(PrimitiveError):
        wkb_guess(poly_r, 2.0)
    g = wkb_guess(reduce(make_bessel(5)), 30.0)
    assert g.imag > 0.9 and abs(g.real) < 0.05


def test_bessel_backward_pair():
    r = reduce(make_bessel(5))
    p = find_primitive_backward(r, window=TimeGrid.uniform(0.5, 100.0, 8001, (0.0,)))
    assert p.kind == "imaginary" and np.all(p.nuI > 0)
    assert p.diagnostics["eq9_max"] < 1e-5
    assert p.diagnostics["conjugate_dev"] < 1e-5


def test_floquet_pair_real():
    r = reduce(make_mathieu(1.0, 1.0)).with_period(2 * math.pi)
    p = floquet_pair(r, TimeGrid.uniform(0.0, 4 * math.pi, 1201))
    assert p.kind == "real" and not p.has_poles
    n = 600
    np.testing.assert_allclose(p.nuR[n:], p.nuR[:-n], atol=1e-7)
    assert np.max(p.eq9_residual(r)) < 1e-5


def test_decompose_roundtrip_constant(const_r, const_pair):
    tr = integrate_rce(const_r, -3.0, const_pair.grid)
    p = decompose_to_primitive(const_r, tr)
    assert np.all(p.plus == 2.0)


def test_decompose_rejects_non_solution(poly_r):
    t = np.linspace(1.0, 5.0, 101)
    with pytest.raises(PrimitiveError):
        decompose_to_primitive(poly_r, (t, np.sin(t)))


def test_complementary(const_pair, const_r):
    nu1 = const_pair.plus
    np.testing.assert_allclose(complementary_of(const_r, nu1, const_pair), -2.0)


def test_pole_mask_and_residual(const_r):
    t = np.linspace(0.0, 1.0, 1001)
    te = 0.25 * math.log(5.0)
    nu = 2 / np.tanh(2 * (t - te))
    mask = pole_mask(t, nu)
    assert mask[np.argmin(np.abs(t - te))] and not mask[0]
    res = solution_residual(const_r, t, nu)
    assert np.nanmax(res) < 1e-6 and np.isnan(res).any()


def test_conjugate_check_constant():
    r = reduce(GeneralRiccati("-1", "0", "-1-0*t"))
    p = autonomous_pair(r, TimeGrid.uniform(0.0, 3.0, 301))
    assert conjugate_check(r, p) < 1e-9
