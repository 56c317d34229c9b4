import numpy as np
import pytest

from fcstat import models


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)


@pytest.fixture
def m8_lattice():
    return models.TwoLeadLattice(sites_left=4, sites_right=4, hopping=1.0,
                                 onsite_left=0.0, onsite_right=0.3, coupling=0.8)


@pytest.fixture
def m8_scenario(m8_lattice):
    return models.build_lattice_scenario(
        m8_lattice, models.StateSpec("pure", mu=0.15),
        models.PropagatorSpec("static", total_time=3.0))


@pytest.fixture
def thermal_scenario():
    lat = models.TwoLeadLattice(sites_left=4, sites_right=4, hopping=1.0,
                                coupling=0.8, bias=0.4)
    return models.build_lattice_scenario(
        lat, models.StateSpec("thermal", mu=0.0, beta=1.0),
        models.PropagatorSpec("static", total_time=3.0))


@pytest.fixture
def chiral_model():
    return models.ChiralModel(
        energy_cutoff=np.pi * 32 / 8.0, grid_points=32,
        scatter=models.mixing_scatter(1.1, 0.2, 1.4), support=(-1.3, 1.7))
