import pytest

from gupbic import nondimensionalize
from gupbic.verification import (
    reference_well_setup,
    harmonic_setup_for,
    linear_setup_for,
)


@pytest.fixture(scope="session")
def well_setup():
    return reference_well_setup()


@pytest.fixture(scope="session")
def well_problem(well_setup):
    return nondimensionalize(well_setup)


@pytest.fixture(scope="session")
def linear_setup():
    return linear_setup_for(0.12)


@pytest.fixture(scope="session")
def linear_problem(linear_setup):
    return nondimensionalize(linear_setup)


@pytest.fixture(scope="session")
def harmonic_setup():
    return harmonic_setup_for(0.12)


@pytest.fixture(scope="session")
def harmonic_problem(harmonic_setup):
    return nondimensionalize(harmonic_setup)
