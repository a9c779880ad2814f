import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("abslab", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("abslab")


def fractions(bound=1000, nonzero=False):
    """Rationals p/q with |p|, q <= bound, the same range the checks sample from."""
    num = st.integers(-bound, bound)
    if nonzero:
        num = num.filter(bool)
    return st.builds(Fraction, num, st.integers(1, bound))


@pytest.fixture
def rng():
    return random.Random(12345)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
