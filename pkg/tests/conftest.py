import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from esisav import make_grid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2 * np.pi


@pytest.fixture
def grid8():
    return make_grid(8, 8, TWO_PI, TWO_PI)


@pytest.fixture
def grid16():
    return make_grid(16, 16, TWO_PI, TWO_PI)


@pytest.fixture
def grid32x16():
    return make_grid(32, 16, TWO_PI, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance verdicts, one line per criterion in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
