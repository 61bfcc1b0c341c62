import numpy as np
import pytest
from hypothesis import settings

from mzteleport.modes import ModeRegistry

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def reg():
    return ModeRegistry()


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: int(k[2:])):
            terminalreporter.write_line(RESULTS[key])
