import numpy as np
import pytest

from ipmhull.core.states import ToleranceConfig


@pytest.fixture
def tol() -> ToleranceConfig:
    return ToleranceConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
