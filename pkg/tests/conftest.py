import numpy as np
import pytest

from liehamsys.dynamics import CoefficientFunction, random_sinusoids


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sinusoids(count: int, seed: int) -> list[CoefficientFunction]:
    return random_sinusoids(count, np.random.default_rng(seed))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
