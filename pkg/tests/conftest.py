import sys

import numpy as np
import pytest

from coble.verify import Workbench


@pytest.fixture(scope="session")
def bench():
    """Shared instances for seed 0: q=7 and q=11 scanned, q=23 planted."""
    return Workbench(seed=0)


@pytest.fixture(scope="session")
def omega7(bench):
    return bench.omega(7)


@pytest.fixture(scope="session")
def points7(bench):
    return bench.points(7)


@pytest.fixture(scope="session")
def group7(bench):
    return bench.group(7)


@pytest.fixture(scope="session")
def omega11(bench):
    return bench.omega(11)


@pytest.fixture(scope="session")
def points11(bench):
    return bench.points(11)


@pytest.fixture(scope="session")
def omega23(bench):
    return bench.omega(23)


@pytest.fixture(scope="session")
def pool23(bench):
    return bench.points(23)


@pytest.fixture(scope="session")
def sextic23(bench):
    return bench.sextic(23)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", [])
    if results:
        terminalreporter.section("acceptance criteria")
        for r in sorted(results, key=lambda r: r.number):
            terminalreporter.write_line(r.line())
