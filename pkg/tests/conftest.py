import numpy as np
import pytest

from potlab.field import PotentialField
from potlab.levelset import boundary_level
from potlab.mesh import Ball, Ellipsoid, make_shape
from potlab.monotone import extract_levels

# Level grid shared by the profile-based tests and the acceptance suite.
ACCEPT_T_GRID = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@pytest.fixture(scope="session")
def ball3_field():
    return PotentialField.from_mesh(make_shape(Ball(1.0), 3))


@pytest.fixture(scope="session")
def ball4_field():
    return PotentialField.from_mesh(make_shape(Ball(1.0), 4))


@pytest.fixture(scope="session")
def ell3_field():
    return PotentialField.from_mesh(make_shape(Ellipsoid(2.0, 1.0, 1.0), 3))


@pytest.fixture(scope="session")
def ell4_field():
    return PotentialField.from_mesh(make_shape(Ellipsoid(2.0, 1.0, 1.0), 4))


@pytest.fixture(scope="session")
def ball3_levels(ball3_field):
    return extract_levels(ball3_field, ACCEPT_T_GRID)


@pytest.fixture(scope="session")
def ell3_levels(ell3_field):
    return extract_levels(ell3_field, ACCEPT_T_GRID)


@pytest.fixture(scope="session")
def ball4_boundary(ball4_field):
    return boundary_level(ball4_field)


@pytest.fixture(scope="session")
def ell3_boundary(ell3_field):
    return boundary_level(ell3_field)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
