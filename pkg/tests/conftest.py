from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from speedscale.model import Instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def F(x):
    return Fraction(x)


@pytest.fixture
def two_jobs():
    """([0,1], w=1) and ([0,2], w=1) at alpha 2."""
    return Instance.single(2, [(0, 1, 0, 1), (1, 1, 0, 2)])


ACCEPTANCE_LINES = []


def report(number: int, ok: bool, detail: str):
    """Record one acceptance line; printed in the terminal summary."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
