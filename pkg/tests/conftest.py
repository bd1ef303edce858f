import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from borderopt import ConstraintSet, variables  # noqa: E402


@pytest.fixture
def xy():
    return variables(2)


@pytest.fixture
def running_f(xy):
    x, y = xy
    return (x - 1) ** 2 * (x - 2) ** 2 * (x**2 + 1) + (y - 1) ** 2 * (y**2 + 1)


@pytest.fixture
def motzkin(xy):
    x, y = xy
    return x**4 * y**2 + x**2 * y**4 - 3 * x**2 * y**2 + 1


@pytest.fixture
def robinson(xy):
    x, y = xy
    return x**6 + y**6 - x**4 * y**2 - x**2 * y**4 - x**4 - y**4 - x**2 - y**2 + 3 * x**2 * y**2 + 1


@pytest.fixture
def empty():
    return ConstraintSet()
