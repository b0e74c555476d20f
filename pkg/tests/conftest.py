import numpy as np
import pytest

from blockcorr.sampling import RngStream


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spec(gen, k_max=4, p_max=6):
    k = int(gen.integers(2, k_max + 1))
    return tuple(int(s) for s in gen.integers(1, p_max + 1, size=k))


def stream(seed, idx=0):
    return RngStream(seed, idx)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
