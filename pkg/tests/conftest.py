import numpy as np
import pytest

from densgeo import PeriodicGrid

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)


@pytest.fixture
def grid256():
    return PeriodicGrid(256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def trig_poly(x, coeffs):
    """``sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)`` for ``coeffs = [(a_1, b_1), ...]``."""
    out = np.zeros_like(x)
    for k, (a, b) in enumerate(coeffs, start=1):
        out = out + a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    return out
