"""Shared pytest fixtures: worked-example lattice and θ, seeded random fields."""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from dqw_geom.lattice import make_lattice, scalar_field  # noqa: E402
from dqw_geom.theta import parse_theta  # noqa: E402

EXAMPLE_THETA = 'arccos(1/(1+0.1*sin(t)))'


@pytest.fixture
def example_lattice():
    return make_lattice(64, 24, 0.05)


@pytest.fixture
def example_theta():
    return parse_theta(EXAMPLE_THETA)


@pytest.fixture
def rng():
    return np.random.RandomState(1234)


@pytest.fixture
def random_theta_field(rng):
    """Full (j, p) coin angles in [-1, 1]: every site nondegenerate."""
    lat = make_lattice(16, 12, 0.1)
    return lat, scalar_field(lat, rng.uniform(-1.0, 1.0, size=lat.shape))
