import pytest

from nstorus import LatticeSpec, get_lattice


@pytest.fixture(scope="session")
def ball1():
    return get_lattice(LatticeSpec(1))


@pytest.fixture(scope="session")
def ball2():
    return get_lattice(LatticeSpec(2))


@pytest.fixture(scope="session")
def ball3():
    return get_lattice(LatticeSpec(3))
