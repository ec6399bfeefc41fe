import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pdoweights.grid import Field, Grid

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(grid: Grid, rng: np.random.Generator) -> Field:
    return Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
