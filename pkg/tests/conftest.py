import numpy as np
import pytest

from pooled_annuity.lifetable import LifeTable, make_gompertz_table


@pytest.fixture(scope="session")
def gompertz_table():
    """Default synthetic table (ages 0..120, strictly positive rates)."""
    return make_gompertz_table(3e-5, 1.1)


@pytest.fixture(scope="session")
def toy_table():
    """Five-age table with heavy mortality so whole cohorts die quickly."""
    return LifeTable(first_age=90, qx=(0.3, 0.4, 0.5, 0.6, 1.0))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20260824))
