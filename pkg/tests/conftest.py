import math

import numpy as np
import pytest

from fractals.ifs import cantor_system
from fractals.measure import DiscreteMeasure

LOG2_LOG3 = math.log(2) / math.log(3)


def cantor_endpoints(depth, ratio=1 / 3):
    """Left endpoints f_w(0) of the depth-k cylinders of the central Cantor set."""
    system = cantor_system(ratio)
    points = np.zeros((1, 1))
    for _ in range(depth):
        points = np.concatenate([m.apply(points) for m in system.maps])
    return points


def random_measure(rng, min_atoms=1, max_atoms=8, low=-5.0, high=5.0):
    size = int(rng.integers(min_atoms, max_atoms + 1))
    return DiscreteMeasure(rng.uniform(low, high, (size, 1)), rng.dirichlet(np.ones(size)))


@pytest.fixture
def example_two():
    """Two maps of ratio 1/3 with probabilities (1/3, 2/3)."""
    return cantor_system(1 / 3, (1 / 3, 2 / 3))


@pytest.fixture
def triadic():
    return cantor_system(1 / 3)


@pytest.fixture
def two_atoms():
    return DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
