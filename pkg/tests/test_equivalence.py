import numpy as np
import pytest

from fellmorita.algebra.group import cyclic_group
from fellmorita.algebra.star_algebra import generate
from fellmorita.bundles.bimodule import check_inclusion_morita, make_bimodule
from fellmorita.bundles.bundle import is_saturated, quasi_basis_and_index, verify_bundle
from fellmorita.bundles.equivalence import (
    assemble_total,
    crossed_product_formulas,
    crossed_product_system,
    identity_equivalence_bundle,
    inner_action,
    inner_bimodule_action,
    make_action,
    make_bimodule_action,
    make_equivalence_bundle,
    relabel_action,
    trivial_action,
    verify_action,
    verify_bimodule_action,
    verify_equivalence_bundle,
)
from fellmorita.errors import AssemblyFailure, IncompatibleActions, ShapeMismatch
from fellmorita.scenario.demos import I2, SIGMA_Z


@pytest.fixture
def z2_inner(m2, m2_bimodule):
    g = cyclic_group(2)
    us = {0: I2, 1: SIGMA_Z}
    alpha = inner_action(m2, g, us)
    lam = inner_bimodule_action(m2_bimodule, alpha, alpha, us, us)
    return alpha, lam


def test_identity_equivalence_bundle_verifies(cz2, pauli, m2_cz2):
    for b in (cz2, pauli, m2_cz2):
        report = verify_equivalence_bundle(identity_equivalence_bundle(b))
        assert report.passed
    assert verify_equivalence_bundle(identity_equivalence_bundle(pauli), max_workers=4).passed


def test_zero_fiber_fails_fullness(cz2):
    e = make_equivalence_bundle(cz2, cz2, [[I2], []])
    assert e.dims == (1, 0)
    report = verify_equivalence_bundle(e)
    assert not report.passed
    assert report.get("right_fullness[1,1]").status == "fail"
    assert report.get("fiber_dimension[1]").status == "fail"
    assert report.get("left_action[0,0]").status == "pass"


def test_wrong_fiber_count(cz2):
    with pytest.raises(ShapeMismatch):
        make_equivalence_bundle(cz2, cz2, [[I2]])


def test_different_groups_rejected(cz2, cz3):
    with pytest.raises(ShapeMismatch):
        make_equivalence_bundle(cz2, cz3, [[I2], [I2]])


def test_assemble_total(pauli):
    datum = assemble_total(identity_equivalence_bundle(pauli))
    assert datum.big.space.dim == 4
    assert datum.small_space.dim == 1
    assert check_inclusion_morita(datum).passed


def test_assemble_total_zero_fiber(cz2):
    e = make_equivalence_bundle(cz2, cz2, [[I2], []])
    with pytest.raises(AssemblyFailure) as exc:
        assemble_total(e)
    assert exc.value.report is not None
    assert not exc.value.report.passed


def test_inner_action_verifies(z2_inner):
    alpha, lam = z2_inner
    assert verify_action(alpha).passed
    assert verify_bimodule_action(lam).passed


def test_action_composition_failure(m2):
    # Ad(diag(1, i)) squares to Ad(σz), not the identity
    alpha = inner_action(m2, cyclic_group(2), {0: I2, 1: np.diag([1.0, 1j])})
    report = verify_action(alpha)
    assert report.get("action.composition").status == "fail"
    assert report.get("action.multiplicative[1]").status == "pass"


def test_transpose_is_not_an_action(m2):
    alpha = make_action(m2, cyclic_group(2), {0: lambda x: x, 1: lambda x: x.T})
    report = verify_action(alpha)
    assert report.get("action.multiplicative[1]").status == "fail"


def test_relabel_action(m2):
    g = cyclic_group(4)
    u = np.diag([1.0, 1j])
    alpha = inner_action(m2, g, {t: np.linalg.matrix_power(u, t) for t in g.elements})
    beta = relabel_action(alpha, [0, 3, 2, 1])
    assert beta.maps[1] is alpha.maps[3]
    assert verify_action(beta).passed


def test_crossed_product_of_inner_action(z2_inner):
    alpha, lam = z2_inner
    system = crossed_product_system(alpha, alpha, lam)
    assert system.bundle_a.dims == (4, 4)
    assert system.bundle_a.ambient == 4
    assert verify_bundle(system.bundle_a).passed
    assert is_saturated(system.bundle_a) and is_saturated(system.bundle_b)
    assert verify_equivalence_bundle(system.equivalence).passed
    assert crossed_product_formulas(alpha, alpha, lam).passed


def test_crossed_product_of_trivial_action_is_group_algebra():
    g = cyclic_group(3)
    c = generate([np.eye(1)])
    alpha = trivial_action(c, g)
    x = make_bimodule(c, c, [np.eye(1)])
    lam = make_bimodule_action(x, alpha, alpha, {t: (lambda y: y) for t in g.elements})
    system = crossed_product_system(alpha, alpha, lam)
    assert system.bundle_a.dims == (1, 1, 1)
    qb = quasi_basis_and_index(system.bundle_a)
    assert np.linalg.norm(qb.index - 3 * np.eye(3)) <= 1e-8
    assert assemble_total(system.equivalence).big.space.dim == 3


def test_crossed_product_rejects_bad_action(m2, m2_bimodule):
    g = cyclic_group(2)
    bad = inner_action(m2, g, {0: I2, 1: np.diag([1.0, 1j])})
    lam = inner_bimodule_action(m2_bimodule, bad, bad, {0: I2, 1: I2}, {0: I2, 1: I2})
    with pytest.raises(IncompatibleActions):
        crossed_product_system(bad, bad, lam)
