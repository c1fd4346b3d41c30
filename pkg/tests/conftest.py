import math

import numpy as np
import pytest

from socialdiv import gaussian_noise, make_belief_engine, make_binary_symmetric, make_symmetric_gaussian

LOG3 = math.log(3.0)

# Lines collected by test_acceptance.py and echoed at the end of the run.
ACCEPTANCE_REPORT = []


@pytest.fixture
def binary():
    return make_binary_symmetric(0.25)


@pytest.fixture
def gaussian():
    return make_symmetric_gaussian(1.0, 4.0)


@pytest.fixture
def binary_engine(binary):
    return make_belief_engine(binary, gaussian_noise(0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
