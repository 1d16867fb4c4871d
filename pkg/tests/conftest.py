import numpy as np
import pytest

from gfemad import build_interval_mesh, build_quad_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def mesh6():
    return build_interval_mesh(1.0, 6)


@pytest.fixture
def quad3():
    return build_quad_mesh(1.0, 1.0, 3, 3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
