import numpy as np
import pytest

from edgetrace import scenes
from edgetrace.geometry import Scene


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def wedge_scene():
    b = scenes.get("wedge")
    return b, Scene(b.mesh, b.bc_of_material())


@pytest.fixture(scope="session")
def boxes_scene():
    b = scenes.get("boxes")
    return b, Scene(b.mesh, b.bc_of_material())


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
