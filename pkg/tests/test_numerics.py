import math

import numpy as np
import pytest

from rcekit.family import fit_to_samples, phase_accumulator
from rcekit.numerics import fd_derivative, stencil_mask
from rcekit.odeengine import TimeGrid
from rcekit.primitive import autonomous_pair, pole_mask
from rcekit.reduction import GeneralRiccati, reduce


def test_fd_uniform_matches_general_path():
    t = np.linspace(0.0, 3.0, 301)
    jitter = t.copy()
    jitter[1:-1] += 1e-7 * np.sin(40 * t[1:-1])      # defeats the uniform fast path
    for order in (1, 2):
        a = fd_derivative(t, np.sin(t), order)
        b = fd_derivative(jitter, np.sin(jitter), order)
        ref = np.cos(t) if order == 1 else -np.sin(t)
        assert np.max(np.abs(a - ref)) < 1e-6
        assert np.max(np.abs(b - (np.cos(jitter) if order == 1 else -np.sin(jitter)))) < 1e-6


def test_stencil_mask_reaches_one_sided_ends():
    bad = np.zeros(20, dtype=bool)
    bad[16] = True
    m = stencil_mask(bad)
    assert m[14:19].all() and m[18:].all() and not m[13]
    bad = np.zeros(20, dtype=bool)
    bad[3] = True
    assert stencil_mask(bad)[:6].all()


def test_pole_mask_keeps_smooth_samples():
    t = np.linspace(0.0, 4.0, 801)
    assert not pole_mask(t, 2.0 * np.ones_like(t)).any()


def test_fit_to_samples_far_K():
    r = reduce(GeneralRiccati("-1", "0", "4"))
    pair = autonomous_pair(r, TimeGrid.uniform(0.0, 20.0, 2001))
    phi = phase_accumulator(r, pair)
    v = 2.0 * np.tanh(2.0 * pair.t - 30.0)      # equals -2 to 1e-25 at t = 0
    f = fit_to_samples(pair, phi, v)
    assert f.branch == "tanh" and f.K == pytest.approx(30.0, abs=1e-9)
