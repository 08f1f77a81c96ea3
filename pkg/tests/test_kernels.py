import math

import numpy as np
import pytest

from rcekit import kernels
from rcekit.odeengine import integrate_polar, integrate_rce, integrate_state
from rcekit.reduction import GeneralRiccati, ScalarSystem, companion, reduce

compiled = pytest.mark.skipif(kernels.get_backend("compiled") is None,
                              reason="compiled kernels not built")


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")


@compiled
@pytest.mark.parametrize("ic", [0.0, -3.0, 5.0])
def test_backends_bitwise_equal_rce(ic):
    r = reduce(GeneralRiccati("-1", "0", "4+cos(t)"))
    t = np.linspace(0.0, 5.0, 201)
    a = integrate_rce(r, ic, t, backend="compiled")
    b = integrate_rce(r, ic, t, backend="python")
    assert np.array_equal(a.values, b.values, equal_nan=True)
    assert [e.t_escape for e in a.escape_events] == [e.t_escape for e in b.escape_events]


@compiled
def test_backends_bitwise_equal_polar_and_state():
    s = ScalarSystem("1/t", "1-25/t^2")
    r = reduce(s)
    t = np.linspace(30.0, 5.0, 101)
    a = integrate_polar(r, complex(-0.01, 1.0), t, backend="compiled")
    b = integrate_polar(r, complex(-0.01, 1.0), t, backend="python")
    assert np.array_equal(a.nuR, b.nuR) and np.array_equal(a.ell, b.ell)
    m = companion(ScalarSystem("0", "-(1+cos(t))"))
    t = np.linspace(0.0, 2 * math.pi, 50)
    assert np.array_equal(integrate_state(m, t, backend="compiled"),
                          integrate_state(m, t, backend="python"))
