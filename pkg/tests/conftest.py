import numpy as np
import pytest

from s3sigma import SpaceConfig


@pytest.fixture
def cfg():
    return SpaceConfig(1.0, 1.0)


@pytest.fixture
def cfg_odd():
    """Non-unit radius and mass to catch hidden unit assumptions."""
    return SpaceConfig(1.3, 0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
