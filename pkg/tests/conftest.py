import math

import pytest
from hypothesis import HealthCheck, settings

from epsn.systems import Iet

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# m = 3 exchange with irrational lengths 1 - 1/sqrt2, g - (1 - 1/sqrt2), 1 - g
# (g the golden ratio conjugate), images placed in reverse order
IET_A = (0.0, 0.29289321881345254, 0.6180339887498949, 1.0)
IET_C = (0.7071067811865475, 0.08907279243665256, -0.6180339887498949)
GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="session")
def iet():
    return Iet(IET_A, IET_C)


@pytest.fixture
def toy_iet():
    return Iet((0.0, 0.4, 1.0), (0.6, -0.4))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
