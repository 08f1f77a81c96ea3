import numpy as np
import pytest

from rcekit.odeengine import TimeGrid
from rcekit.primitive import autonomous_pair
from rcekit.reduction import GeneralRiccati, ScalarSystem, reduce


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running checks")


@pytest.fixture
def const_r():
    """nu' = -nu^2 + 4."""
    return reduce(GeneralRiccati("-1", "0", "4"))


@pytest.fixture
def const_pair(const_r):
    return autonomous_pair(const_r, TimeGrid.uniform(0.0, 4.0, 2001))


@pytest.fixture
def poly_r():
    """z' = -z^2 + 2/t^2 with solutions 2/t and -1/t."""
    return reduce(GeneralRiccati("-1", "0", "2/t^2"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")
