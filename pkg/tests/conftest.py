import numpy as np
import pytest

from entset import from_schmidt, maximally_entangled

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def alpha():
    return from_schmidt([1 / 4, 1 / 4, 1 / 16, 7 / 16], label="alpha")


@pytest.fixture
def beta():
    return from_schmidt([1 / 4, 1 / 4, 1 / 2, 0], label="beta")


@pytest.fixture
def upsilon():
    return maximally_entangled(2, 4, label="upsilon")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
