import os

import pytest

# Tests run with explicit, generous budgets regardless of the caller's environment
os.environ["REES_GB_STEP_BUDGET"] = "200000"
os.environ["REES_CELL_BUDGET"] = "0"
os.environ["REES_WALL_CLOCK_SECONDS"] = "0"
os.environ["REES_THREADS"] = "1"
os.environ["REES_LOG_LEVEL"] = "WARNING"

from reeskit.services.gradedla import QuotientRing  # noqa: E402
from reeskit.services.polycore import PolynomialRing  # noqa: E402


@pytest.fixture(autouse=True)
def test_env_setup():
    os.environ["REES_THREADS"] = "1"
    os.environ["REES_LOG_LEVEL"] = "WARNING"
    yield


@pytest.fixture
def xyz():
    return PolynomialRing(("x", "y", "z"))


@pytest.fixture
def cubic_threefold():
    """k[u,v,w,x,y,z] modulo the shipped cubic."""
    from reeskit import constants

    ring = PolynomialRing(("u", "v", "w", "x", "y", "z"))
    return QuotientRing(ring, [ring.parse(constants.EXAMPLE_41_CUBIC)])


@pytest.fixture
def a2_surface():
    """k[x,y,z]/(x*y + z^3) with x, y in degree 3 and z in degree 2."""
    ring = PolynomialRing(("x", "y", "z"), (3, 3, 2))
    return QuotientRing(ring, [ring.parse("x*y + z^3")])
