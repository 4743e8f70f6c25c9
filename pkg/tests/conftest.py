import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lab",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lab")

from monotone_lab import systems


@pytest.fixture(scope="session")
def cat():
    return systems.catalog()


@pytest.fixture(scope="session")
def cubic(cat):
    return cat["cubic_map"]


@pytest.fixture(scope="session")
def logistic(cat):
    return cat["logistic_map"]


@pytest.fixture(scope="session")
def coop(cat):
    return cat["linear_cooperative"]


@pytest.fixture(scope="session")
def dirichlet15(cat):
    return cat["dirichlet_cubic_15"]


@pytest.fixture(scope="session")
def dirichlet5(cat):
    return cat["dirichlet_cubic_5"]


@pytest.fixture(scope="session")
def neumann5(cat):
    return cat["neumann_cubic_5"]


@pytest.fixture(scope="session")
def ring5(cat):
    return cat["ring_cubic_5"]


@pytest.fixture(scope="session")
def radial15(cat):
    return cat["radial_cubic_15"]
