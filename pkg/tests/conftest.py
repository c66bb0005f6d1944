import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from scatterwave import StateVector

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_state(rng, n):
    return StateVector(rng.normal(size=n) + 1j * rng.normal(size=n),
                       rng.normal(size=n) + 1j * rng.normal(size=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
