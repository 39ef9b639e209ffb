import numpy as np
import pytest

from fellmorita.algebra.matspace import adjoint_span, dagger, equals, full_space, product_span, zero_space
from fellmorita.algebra.star_algebra import generate
from fellmorita.bundles.bimodule import (
    ConcreteBimodule,
    InclusionMoritaDatum,
    check_inclusion_morita,
    dual,
    identity_datum,
    left_frame,
    make_bimodule,
    right_frame,
    tensor,
    verify_bimodule,
)
from fellmorita.errors import MiddleAlgebraMismatch
from fellmorita.scenario.demos import matrix_units

E11, E12, E21, E22 = matrix_units(2)


@pytest.fixture
def scalars():
    return generate([np.eye(1)])


def test_matrix_algebra_over_itself(m2_bimodule):
    report = verify_bimodule(m2_bimodule, require_full=True)
    assert report.passed
    assert report.get("left_full").status == "pass"


def test_left_action_violation(m2):
    x = make_bimodule(m2, m2, [E11, E12])
    report = verify_bimodule(x)
    rec = report.get("left_action")
    assert rec.status == "fail"
    assert rec.message == "LeftActionViolation"


def test_zero_module_is_not_full(scalars):
    x = make_bimodule(scalars, scalars, zero_space(1, 1))
    report = verify_bimodule(x, require_full=True)
    assert report.get("left_action").status == "pass"
    assert report.get("right_inner_product").status == "pass"
    assert report.get("left_full").status == "fail"
    assert report.get("right_full").status == "fail"


def test_dual(m2_bimodule, scalars):
    assert equals(dual(m2_bimodule).space, m2_bimodule.space)
    corner = generate([E11])
    rows = make_bimodule(scalars, corner, [np.array([[1.0, 0.0]])])
    cols = dual(rows)
    assert cols.shape == (2, 1)
    assert cols.left is corner and cols.right is scalars
    assert equals(dual(cols).space, rows.space)


def test_tensor(m2, m2_bimodule, scalars):
    assert equals(tensor(m2_bimodule, m2_bimodule).space, m2_bimodule.space)
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    cols = make_bimodule(m2, scalars, full_space(2, 1))
    assert tensor(rows, cols).space.dim == 1


def test_tensor_middle_mismatch(m2, scalars):
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    diag = generate([E11, E22])
    other = make_bimodule(diag, diag, [E11, E22])
    with pytest.raises(MiddleAlgebraMismatch):
        tensor(rows, other)


def test_dual_reverses_tensor(m2, scalars):
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    x = make_bimodule(m2, m2, full_space(2, 2))
    lhs = dual(tensor(rows, x)).space
    rhs = tensor(dual(x), dual(rows)).space
    assert equals(lhs, rhs)


def test_tensor_is_associative(m2, scalars):
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    x = make_bimodule(m2, m2, full_space(2, 2))
    cols = make_bimodule(m2, scalars, full_space(2, 1))
    assert equals(tensor(tensor(rows, x), cols).space, tensor(rows, tensor(x, cols)).space)


def test_equivalence_bimodule_absorbs_inner_products(m2, scalars):
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    inner = product_span(rows.space, adjoint_span(rows.space))
    assert equals(product_span(inner, rows.space), rows.space)


def test_frames(m2_bimodule):
    us = left_frame(m2_bimodule)
    ws = right_frame(m2_bimodule)
    assert np.linalg.norm(sum(u @ dagger(u) for u in us) - np.eye(2)) <= 1e-10
    assert np.linalg.norm(sum(dagger(w) @ w for w in ws) - np.eye(2)) <= 1e-10


def test_inclusion_morita_scalars(scalars):
    y = ConcreteBimodule(left=scalars, right=scalars, space=scalars.space)
    datum = InclusionMoritaDatum(big=y, small_space=scalars.space, small_left=scalars, small_right=scalars)
    assert check_inclusion_morita(datum).passed


def test_inclusion_morita_identity_datum(cz2, pauli):
    assert check_inclusion_morita(identity_datum(cz2)).passed
    assert check_inclusion_morita(identity_datum(pauli)).passed


def test_inclusion_morita_zero_small(scalars):
    y = ConcreteBimodule(left=scalars, right=scalars, space=scalars.space)
    datum = InclusionMoritaDatum(big=y, small_space=zero_space(1, 1), small_left=scalars, small_right=scalars)
    report = check_inclusion_morita(datum)
    assert not report.passed
    assert report.get("span_Y_Xstar").status == "fail"
