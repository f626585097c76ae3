import numpy as np
import pytest

from twistrenorm.config import RunConfig
from twistrenorm.curve import curve_sequence, diagonal_seed
from twistrenorm.ifs import box_levels
from twistrenorm.pipeline import prepare, solve
from twistrenorm.series import BivariateSeries


@pytest.fixture(scope="session")
def solved():
    """``(gen, report, path)`` for the default schedule 6, 10, 14, 20."""
    return solve(RunConfig())


@pytest.fixture(scope="session")
def gen(solved):
    return solved[0]


@pytest.fixture(scope="session")
def scope(gen):
    return prepare(gen)


@pytest.fixture(scope="session")
def levels(scope):
    return box_levels(scope.scal, scope.m, 10, scope.region.sample())


@pytest.fixture(scope="session")
def curves(scope):
    seed = diagonal_seed(scope.region, metric=scope.metric)
    return curve_sequence(seed, scope.scal, scope.m, 12)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def shear():
    """``s = X - x``, whose map is the shear ``(x, y) -> (x + y, y)``."""
    return BivariateSeries.from_terms({(0, 1): 1.0, (1, 0): -1.0}, 1)
