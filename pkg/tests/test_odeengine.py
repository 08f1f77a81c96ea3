import math

import numpy as np
import pytest

from rcekit.odeengine import (TimeGrid, continue_through_pole,
                              detect_escape_events, integrate_rce, integrate_scalar,
                              integrate_state)
from rcekit.reduction import GeneralRiccati, ScalarSystem, companion, reduce

ESCAPE = 0.25 * math.log(5.0)   # 2coth(2(t - te)) through -3 at t = 0


def test_escape_time(const_r):
    tr = integrate_rce(const_r, -3.0, TimeGrid.uniform(0.0, 4.0, 401))
    ev = tr.event_times()
    assert len(ev) == 1 and abs(ev[0] - ESCAPE) < 1e-8
    assert tr.escape_events[0].side_signs == (-1, 1)
    assert abs(tr.values[-1].real - 2.0) < 1e-5


def test_matches_closed_form_through_pole(const_r):
    t = np.linspace(0.0, 3.0, 3001)
    tr = integrate_rce(const_r, -3.0, t)
    exact = 2.0 / np.tanh(2.0 * (t - ESCAPE))
    ok = np.abs(t - ESCAPE) > 0.02
    np.testing.assert_allclose(tr.values.real[ok], exact[ok], rtol=1e-7)
    assert len(tr.escape_events) == 1


def test_fixed_point_stays(const_r):
    tr = integrate_rce(const_r, 2.0, np.linspace(0, 5, 51))
    assert np.max(np.abs(tr.values - 2.0)) == 0.0


def test_infinite_initial_condition(const_r):
    tr = integrate_rce(const_r, math.inf, np.linspace(0.0, 1.0, 101))
    np.testing.assert_allclose(tr.values.real[1:], 2 / np.tanh(2 * tr.t[1:]), rtol=1e-7)


def test_backward_integration(const_r):
    t = np.linspace(1.0, 0.0, 101)
    tr = integrate_rce(const_r, 2 * math.tanh(2.0), t)
    np.testing.assert_allclose(tr.values.real, 2 * np.tanh(2 * t), atol=1e-8)


def test_stop_and_continue(const_r):
    grid = TimeGrid.uniform(0.0, 2.0, 201)
    pre = integrate_rce(const_r, -3.0, grid, continue_poles=False)
    assert pre.stopped_at is not None and pre.stopped_at < ESCAPE
    full = continue_through_pole(const_r, pre)
    assert len(detect_escape_events(full)) == 1


def test_polynomial_case_matches_known_solution(poly_r):
    t = np.linspace(1.0, 10.0, 91)
    tr = integrate_rce(poly_r, 2.0, t, tol=1e-12)
    np.testing.assert_allclose(tr.values.real, 2 / t, rtol=1e-9)


def test_grid_rejects_singular_point():
    with pytest.raises(ValueError):
        TimeGrid.uniform(-1.0, 1.0, 11, singular_points=(0.0,))


def test_state_and_scalar():
    m = companion(ScalarSystem("0", "-4"))
    t = np.linspace(0.0, 1.0, 11)
    phi = integrate_state(m, t)
    np.testing.assert_allclose(phi[:, 0, 0], np.cosh(2 * t), rtol=1e-9)
    y, dy = integrate_scalar(ScalarSystem("0", "1"), 0.0, 1.0, t)
    np.testing.assert_allclose(y, np.sin(t), atol=1e-10)
    np.testing.assert_allclose(dy, np.cos(t), atol=1e-10)
