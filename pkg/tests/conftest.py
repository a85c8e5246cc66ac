import numpy as np
import pytest

from sctsa.synth import bifurcating_trajectory


@pytest.fixture(scope="session")
def bundled():
    return bifurcating_trajectory()


@pytest.fixture(scope="session")
def small_bundled():
    return bifurcating_trajectory(n_groups=6, cells_per_group=40, branch_group=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
