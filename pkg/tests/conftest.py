import numpy as np
import pytest

from nqglab.decoherence import evolve_branch_pair
from nqglab.scenario import ScenarioConfig


@pytest.fixture
def regression_config() -> ScenarioConfig:
    """The frozen 1D regression scenario (defaults + pinned dt)."""
    return ScenarioConfig(dt=5e-4)


@pytest.fixture(scope="session")
def regression_pair_2048():
    return evolve_branch_pair(ScenarioConfig(n=2048, dt=5e-4))


@pytest.fixture(scope="session")
def regression_pair_4096():
    return evolve_branch_pair(ScenarioConfig(n=4096, dt=5e-4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
