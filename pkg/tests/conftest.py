import sys

import numpy as np
import pytest

from specden import ArmaSpec, arma_simulate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def arma_series():
    """One ARMA(1,1) path with phi=.9, vartheta=.4 and n=200."""
    return arma_simulate(ArmaSpec(0.9, 0.4), 200, seed=11)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
