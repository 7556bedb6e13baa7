import math

import numpy as np
import pytest

from correlations.deficit import deficit_report
from correlations.linalg import LogBase
from correlations.states import StateName, StateSpec

# closed forms in nats
W_PAIR = math.log(3.0) - (-(2 / 3) * math.log(2 / 3) - (1 / 3) * math.log(1 / 3))
W_BIPART = -(2 / 3) * math.log(2 / 3) - (1 / 3) * math.log(1 / 3)
WWBAR_BIPART = -(5 / 6) * math.log(5 / 6) - (1 / 6) * math.log(1 / 6)

# permutation-symmetric states
SYMMETRIC_SPECS = [
    StateSpec.named(StateName.W),
    StateSpec.named(StateName.WBAR),
    StateSpec.named(StateName.WWBAR),
    StateSpec.named(StateName.GHZ),
    StateSpec.from_theta(0.3),
    StateSpec.from_theta(1.0),
    StateSpec.from_theta(2.74),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def w_report():
    return deficit_report(StateSpec.named(StateName.W))


@pytest.fixture
def wwbar_report():
    return deficit_report(StateSpec.named(StateName.WWBAR))


@pytest.fixture
def ghz_report():
    return deficit_report(StateSpec.named(StateName.GHZ))


@pytest.fixture
def ghz_bits_report():
    return deficit_report(StateSpec.named(StateName.GHZ), LogBase.BITS)


def random_hermitian(rng, dim):
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2.0


def random_density(rng, dim, rank=None):
    rank = rank or dim
    raw = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = raw @ raw.conj().T
    return rho / np.trace(rho).real
