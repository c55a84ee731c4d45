import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from smoothdiv.operators import random_channel, random_psd, random_state

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def qubit_pair(seed):
    rng = np.random.default_rng(seed)
    return random_state(2, rng), random_state(2, rng)


def triple(seed, dim=2):
    """(rho, sigma, channel) with sigma a random PSD operator."""
    rng = np.random.default_rng(seed)
    return random_state(dim, rng), random_psd(dim, rng), random_channel(dim, rng)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
