import numpy as np
import pytest

from spiked_rmt.phase import Potential, solve_equilibrium

# Quartic with a shallow right well: the outlier location jumps between two
# maxima of G at a secondary critical spike value.
SECONDARY_COEF = [0.0, 0.0, 0.5, -0.06, 0.0025]
# Deeper right well: the outlier detaches before the edge value 1/2 V'(e).
JUMP_COEF = [0.0, 0.0, 0.5871875, -0.12, 0.0075]


@pytest.fixture(scope="session")
def gaussian():
    return Potential.gaussian()


@pytest.fixture(scope="session")
def gaussian_eq(gaussian):
    return solve_equilibrium(gaussian)


@pytest.fixture(scope="session")
def quartic():
    return Potential.quartic()


@pytest.fixture(scope="session")
def quartic_eq(quartic):
    return solve_equilibrium(quartic)


@pytest.fixture(scope="session")
def secondary_eq():
    return solve_equilibrium(Potential(SECONDARY_COEF, name="shallow-well"))


@pytest.fixture(scope="session")
def jump_eq():
    return solve_equilibrium(Potential(JUMP_COEF, name="deep-well"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
