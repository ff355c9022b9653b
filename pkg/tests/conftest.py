import hypothesis
import numpy as np
import pytest

from kswave import GrowthProfile, InitialCondition, SimParams

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def case1_profile():
    return GrowthProfile.from_breakpoints([(-8.0, -1.0), (-7.0, 10.0)])


@pytest.fixture(scope="session")
def case2_profile():
    return GrowthProfile.from_breakpoints(
        [(-8.0, -1.0), (-7.0, 10.0), (7.0, 10.0), (8.0, -1.0)])


@pytest.fixture(scope="session")
def exp1_params():
    return SimParams(chi=0.1, mu=1.0, nu=0.05, b=1.0, c=1.0)


@pytest.fixture(scope="session")
def case2_exp1_params():
    return SimParams(chi=0.6, mu=1.0, nu=1.0, b=1.0, c=1.0)


@pytest.fixture(scope="session")
def case1_u0():
    return InitialCondition(breakpoints=((-1.0, 0.0), (1.0, 10.0)))


@pytest.fixture(scope="session")
def case2_u0():
    return InitialCondition(bump=(-1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20230917)
