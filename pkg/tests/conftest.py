import numpy as np
import pytest

from adiacont.filters import FilterSpec
from adiacont.hamiltonian import perturbed_classical_model

SEED = 20240817


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def chain6():
    return perturbed_classical_model(1, 6, 0.2)


@pytest.fixture(scope="session")
def chain8():
    return perturbed_classical_model(1, 8, 0.2)


@pytest.fixture(scope="session")
def spec06():
    return FilterSpec(gamma=0.6)


@pytest.fixture(scope="session")
def spec09():
    return FilterSpec(gamma=0.9)
