import numpy as np
import pytest

from csgames import sample_games


@pytest.fixture
def trap():
    return sample_games.trap_game()


@pytest.fixture
def ctrap():
    return sample_games.constrained_trap_game()


@pytest.fixture
def pair():
    return sample_games.decoupled_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
