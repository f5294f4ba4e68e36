import numpy as np
import pytest

from ence.states import make_named_state


@pytest.fixture
def bell():
    return make_named_state("bell")


@pytest.fixture
def zero_plus():
    return make_named_state("zero_plus")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
