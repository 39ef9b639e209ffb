import numpy as np
import pytest

from fellmorita.algebra.matspace import LinearMap, full_space, span, zero_space
from fellmorita.algebra.star_algebra import generate
from fellmorita.bundles.bimodule import make_bimodule
from fellmorita.bundles.bundle import is_saturated, verify_bundle
from fellmorita.bundles.equivalence import identity_equivalence_bundle
from fellmorita.bundles.involutive import (
    build_C_M,
    bundle_to_involutive,
    check_roundtrip,
    dual_involutive,
    extract_from_equivalence_bundle,
    involution_deviation,
    linking_and_bundle,
    linking_isomorphism,
    make_involutive,
    psi_theta_check,
    theorem52_check,
    transport,
    transport_functoriality,
    verify_involutive,
)
from fellmorita.errors import ClosureFailure, NotAnInvolutiveIsomorphism, ShapeMismatch, WrongGroup
from fellmorita.scenario.demos import matrix_units

E11, E12, E21, E22 = matrix_units(2)


@pytest.fixture
def scalars():
    return generate([np.eye(1)])


@pytest.fixture
def scalar_star(scalars):
    return make_involutive(make_bimodule(scalars, scalars, [np.eye(1)]))


def _identity(x):
    return LinearMap.identity(x.space)


@pytest.mark.parametrize("kind", ["adjoint", "phase_adjoint"])
def test_valid_involutions(m2_bimodule, kind):
    x = make_involutive(m2_bimodule, kind)
    assert verify_involutive(x).passed


def test_transpose_is_not_an_involution(m2_bimodule):
    report = verify_involutive(make_involutive(m2_bimodule, "transpose"))
    assert report.get("natural.reverses_actions").status == "fail"
    assert report.get("natural.conjugate_linear").status == "fail"


def test_make_involutive_rejects_bad_input(m2_bimodule):
    with pytest.raises(ShapeMismatch):
        make_involutive(m2_bimodule, "matrix", matrix=np.eye(3))
    with pytest.raises(ValueError):
        make_involutive(m2_bimodule, "mirror")


def test_dual_involutive(m2_star):
    dual = dual_involutive(m2_star)
    assert verify_involutive(dual).passed
    assert involution_deviation(dual, m2_star) <= 1e-10


def test_linking_of_matrix_algebra(m2_star):
    linking = linking_and_bundle(m2_star)
    assert linking.z2bundle.dims == (4, 4)
    assert linking.z2bundle.ambient == 4
    assert is_saturated(linking.z2bundle)
    assert linking.report.passed
    x = E12 + 1j * E21
    assert np.allclose(linking.embed(E11, x)[2:, :2], x)
    assert np.allclose(linking.embed(E11, x)[:2, :2], E11)


def test_linking_of_zero_module(scalars):
    x = make_involutive(make_bimodule(scalars, scalars, zero_space(1, 1)))
    linking = linking_and_bundle(x)
    assert linking.z2bundle.dims == (1, 0)
    assert not is_saturated(linking.z2bundle)
    assert verify_bundle(linking.z2bundle).passed
    assert linking.report.get("fullness_iff_saturation").status == "pass"


def test_bundle_to_involutive_needs_z2(cz3):
    with pytest.raises(WrongGroup):
        bundle_to_involutive(cz3)


@pytest.mark.parametrize("name", ["cz2", "pauli_z2"])
def test_bundle_roundtrip(request, name):
    b = request.getfixturevalue(name)
    x = bundle_to_involutive(b)
    assert verify_involutive(x).passed
    assert check_roundtrip(b).passed


def test_linking_isomorphism_identity(m2_star):
    assert linking_isomorphism(m2_star, m2_star, _identity(m2_star)).passed


def test_transport_along_matrix_algebra(m2_bimodule, m2_star):
    moved = transport(m2_bimodule, m2_star)
    assert moved.space.dim == 4
    assert involution_deviation(moved, m2_star) <= 1e-10


def test_transport_to_scalars(m2, m2_star, scalars):
    cols = make_bimodule(m2, scalars, full_space(2, 1))
    moved = transport(cols, m2_star)
    assert moved.space.shape == (1, 1)
    assert moved.space.dim == 1
    assert verify_involutive(moved).passed
    assert np.allclose(moved(1j * np.eye(1)), -1j * np.eye(1))


def test_transport_is_functorial(m2, m2_bimodule, m2_star, scalars):
    cols = make_bimodule(m2, scalars, full_space(2, 1))
    unit = make_bimodule(scalars, scalars, [np.eye(1)])
    assert transport_functoriality(cols, unit, m2_star).passed
    assert transport_functoriality(m2_bimodule, m2_bimodule, m2_star).passed


def test_transport_shape_mismatch(scalar_star, m2_bimodule):
    with pytest.raises(ShapeMismatch):
        transport(m2_bimodule, scalar_star)


def test_psi_theta_identity(m2_bimodule, m2_star):
    report = psi_theta_check(m2_bimodule, m2_star, m2_star, _identity(m2_star))
    assert report.passed
    assert report.get("psi.frame_independent").status == "pass"
    assert report.get("theta_after_psi").status == "pass"


def test_psi_theta_rejects_scaled_phi(m2_bimodule, m2_star):
    with pytest.raises(NotAnInvolutiveIsomorphism) as exc:
        psi_theta_check(m2_bimodule, m2_star, m2_star, _identity(m2_star).scaled(2))
    assert exc.value.report.get("phi.left_inner").status == "fail"


def test_C_M_for_matrix_algebra(m2_bimodule, m2_star):
    cm = build_C_M(m2_bimodule, m2_star, m2_star, _identity(m2_star))
    assert cm.report.passed
    assert cm.report.get("frames.left_sum").status == "pass"
    assert cm.report.get("frames.right_sum").status == "pass"
    assert cm.equivalence.dims == (4, 4)
    assert cm.datum.big.space.dim == 8


def test_C_M_for_scalars(scalars, scalar_star):
    unit = make_bimodule(scalars, scalars, [np.eye(1)])
    cm = build_C_M(unit, scalar_star, scalar_star, _identity(scalar_star))
    assert cm.report.passed
    assert cm.equivalence.dims == (1, 1)


def test_C_M_closure_failure(m2_bimodule, m2_star):
    with pytest.raises(ClosureFailure):
        build_C_M(m2_bimodule, m2_star, m2_star, _identity(m2_star).scaled(1j))


def test_C_M_with_non_full_m():
    diag = generate([E11, E22])
    x = make_involutive(make_bimodule(diag, diag, [E11, E22]))
    m = make_bimodule(diag, diag, span([E11]))
    y = transport(m, x)
    assert y.space.dim == 1
    cm = build_C_M(m, x, y, _identity(y))
    assert not cm.report.passed
    assert cm.report.get("C_M.left_full").status == "fail"


def test_inclusions_strongly_equivalent(m2, m2_bimodule, m2_star):
    report = theorem52_check(m2, m2_star, m2, m2_star, m=m2_bimodule, phi=_identity(m2_star))
    assert report.passed
    assert report.get("direction1.strongly_morita_equivalent").status == "pass"
    rec = report.get("direction2.relative_commutant")
    assert rec.status == "skip"
    assert rec.residual == 2.0


def test_inclusions_with_bad_phi(m2, m2_bimodule, m2_star):
    report = theorem52_check(m2, m2_star, m2, m2_star, m=m2_bimodule, phi=_identity(m2_star).scaled(2))
    assert not report.passed
    assert report.get("direction1.strongly_morita_equivalent").status == "fail"


def test_extraction_from_equivalence_bundle(cz2):
    extraction = extract_from_equivalence_bundle(identity_equivalence_bundle(cz2))
    assert extraction.report.passed
    assert extraction.m.space.dim == 1
    x = bundle_to_involutive(cz2)
    report = theorem52_check(
        cz2.fiber_algebra, x, cz2.fiber_algebra, x, equivalence=identity_equivalence_bundle(cz2)
    )
    assert report.passed
    assert report.get("direction2.extraction.phi_into_B1").status == "pass"


def test_extraction_needs_z2(pauli):
    with pytest.raises(WrongGroup):
        extract_from_equivalence_bundle(identity_equivalence_bundle(pauli))


def test_transport_from_scalars_along_rows(m2, m2_star, scalars, scalar_star):
    rows = make_bimodule(scalars, m2, full_space(1, 2))
    moved = transport(rows, scalar_star)
    assert moved.space.shape == (2, 2)
    assert moved.space.dim == 4
    assert verify_involutive(moved).passed
    assert np.allclose(moved.natural(1j * E12), -1j * E21)
    assert involution_deviation(moved, m2_star) <= 1e-10


def test_C_M_rejects_a_non_bijective_phi():
    diag = generate([E11, E22])
    x = make_involutive(make_bimodule(diag, diag, [E11, E22]))
    m = make_bimodule(diag, diag, span([E11]))
    small = transport(m, x)
    assert small.space.dim == 1
    phi = LinearMap.from_function(small.space, x.space, lambda s: s)
    with pytest.raises(NotAnInvolutiveIsomorphism) as exc:
        build_C_M(m, x, x, phi)
    assert exc.value.report.get("phi.bijective").status == "fail"
