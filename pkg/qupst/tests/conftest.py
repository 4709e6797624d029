"""Shared fixtures: small circuits, profiles and a tiny exact-label dataset."""

import numpy as np
import pytest

from qupst.models.circuit import Gate
from qupst.models.dataset import GenSpec
from qupst.services.circuit_ops import build_circuit
from qupst.services.dataset_builder import build_dataset
from qupst.services.featurizer import featurize_all
from qupst.services.noise_model import make_profile


@pytest.fixture
def bell():
    return build_circuit(2, [Gate.rz(1.5707963267948966, 0), Gate.sx(0), Gate.cnot(0, 1)], [(0, 1)])


@pytest.fixture
def profile3():
    return make_profile(3, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_spec():
    return GenSpec(qubit_range=(2, 3), gate_range=(3, 8), n_circuits=12, noise_factors=[0.5, 1.0, 2.0], shots=None)


@pytest.fixture(scope="session")
def tiny_dataset(tiny_spec):
    """36 exact-label samples split 25/7/4."""
    return build_dataset(tiny_spec, master_seed=3, workers=1)


@pytest.fixture(scope="session")
def tiny_features(tiny_dataset):
    return featurize_all(tiny_dataset.samples)


@pytest.fixture
def random_density(rng):
    """Factory for random full-rank density matrices."""

    def make(n_qubits: int) -> np.ndarray:
        dim = 2 ** n_qubits
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = a @ a.conj().T
        return rho / np.trace(rho)

    return make
