import numpy as np
import pytest

from relaxfv import thermo, verify


@pytest.fixture(scope="session")
def helium():
    return thermo.SpeciesSet.bundled(["He"])


@pytest.fixture(scope="session")
def nitrogen():
    return thermo.SpeciesSet.bundled(["N2"])


@pytest.fixture(scope="session")
def air5():
    return thermo.SpeciesSet.bundled(["N2", "O2", "NO", "N", "O"])


@pytest.fixture(scope="session")
def mix3():
    """Two diatomic and one monoatomic species: the generic test mixture."""
    return thermo.SpeciesSet.bundled(["N2", "O2", "He"])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def moderate_states(species, dim, n, rng):
    """Random admissible states with O(1) magnitudes (well-conditioned)."""
    return verify.random_states(species, dim, n, rng,
                                rho_range=(0.1, 10.0), e_range=(0.1, 10.0))


@pytest.fixture
def air5_composition(air5):
    Y = np.zeros(air5.n_species)
    for name, y in [("N2", 0.7543), ("O2", 0.2283), ("NO", 0.01026),
                    ("N", 6.5e-7), ("O", 0.00713)]:
        Y[air5.index(name)] = y
    return Y / Y.sum()
