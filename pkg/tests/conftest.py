import numpy as np
import pytest

from qinv.chancore import choi_to_superop
from qinv.ensembles import random_channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_superop(d, rng):
    return choi_to_superop(random_channel(d, rng))


def random_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(d, rng, rank=None):
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
