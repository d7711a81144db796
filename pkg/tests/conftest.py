import pytest

from satmc.ctmc import Ctmc, RewardStructure, build_state_space
from satmc.ram.models import build_constellation_model, build_single_satellite_model
import numpy as np


def two_state(lam=1.0, mu=1.0):
    """s=0 up, s=1 down; state reward 1 on up."""
    c = Ctmc.from_rates([(0, 1, lam), (1, 0, mu)])
    c.rewards = {"up": RewardStructure("up", np.array([1.0, 0.0]))}
    return c


@pytest.fixture
def birth_death():
    return two_state()


@pytest.fixture(scope="session")
def satellite():
    return build_state_space(build_single_satellite_model())


@pytest.fixture(scope="session")
def constellation():
    return build_state_space(build_constellation_model())
