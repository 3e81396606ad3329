import warnings

import numpy as np
import pytest

from qbattery.battery import battery_hamiltonian
from qbattery.linalg import DensityMatrix, random_hermitian


def make_random_battery(rng, d, g=1.0, scale=1.0):
    """Random Hermitian battery; interaction canonicalization warnings silenced."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return battery_hamiltonian(
            random_hermitian(rng, d, scale),
            random_hermitian(rng, d, scale),
            random_hermitian(rng, d * d, scale),
            g=g,
        )


def bell_state():
    v = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    return DensityMatrix(np.outer(v, v.conj()))


def max_entangled_state(d):
    v = np.zeros(d * d, dtype=np.complex128)
    v[:: d + 1] = 1 / np.sqrt(d)
    return DensityMatrix(np.outer(v, v.conj()))


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
