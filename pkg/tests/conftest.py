import numpy as np
import pytest

from fellmorita.algebra.group import cyclic_group, direct_product
from fellmorita.algebra.matspace import full_space
from fellmorita.algebra.star_algebra import as_algebra
from fellmorita.bundles.bimodule import make_bimodule
from fellmorita.bundles.bundle import make_bundle
from fellmorita.bundles.involutive import make_involutive
from fellmorita.scenario.demos import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, matrix_units, regular_representation


def group_algebra_bundle(n: int):
    g = cyclic_group(n)
    lam = regular_representation(g)
    return make_bundle(g, [[lam[t]] for t in g.elements], name=f"CZ{n}")


@pytest.fixture
def cz2():
    return group_algebra_bundle(2)


@pytest.fixture
def cz3():
    return group_algebra_bundle(3)


@pytest.fixture
def cz4():
    return group_algebra_bundle(4)


@pytest.fixture
def pauli():
    v = direct_product(cyclic_group(2), cyclic_group(2))
    return make_bundle(v, [[I2], [SIGMA_Z], [SIGMA_X], [SIGMA_Y]], name="pauli")


@pytest.fixture
def m2_cz2():
    units = matrix_units(2)
    return make_bundle(
        cyclic_group(2),
        [[np.kron(e, I2) for e in units], [np.kron(e, SIGMA_X) for e in units]],
        name="M2_CZ2",
    )


@pytest.fixture
def pauli_z2():
    return make_bundle(cyclic_group(2), [[I2, SIGMA_Z], [SIGMA_X, SIGMA_Y]], name="pauli_z2")


@pytest.fixture
def m2():
    return as_algebra(full_space(2, 2))


@pytest.fixture
def m2_bimodule(m2):
    return make_bimodule(m2, m2, full_space(2, 2))


@pytest.fixture
def m2_star(m2_bimodule):
    return make_involutive(m2_bimodule, "adjoint")
