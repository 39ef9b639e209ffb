import numpy as np
import pytest

from fellmorita.algebra.group import cyclic_group
from fellmorita.bundles.basic_construction import (
    a1_fibers,
    build_basic_construction,
    bundle_A1_and_iso,
    tau_coordinates,
    theta,
)
from fellmorita.bundles.bundle import make_bundle
from fellmorita.errors import NotSaturated
from fellmorita.scenario.demos import I2, SIGMA_X

BUNDLES = ["cz2", "cz3", "pauli", "m2_cz2"]


@pytest.fixture(params=BUNDLES)
def bundle(request):
    return request.getfixturevalue(request.param)


def test_basic_construction_report_passes(bundle):
    r = build_basic_construction(bundle)
    assert r.report.passed, [rec.id for rec in r.report.failures()]
    assert r.d == sum(bundle.dims)
    assert r.order[0] == bundle.group.identity
    assert len(r.e_proj) == bundle.group.order


@pytest.mark.parametrize("name, order", [("cz2", 2), ("cz3", 3)])
def test_group_algebra_c1_is_full(request, name, order):
    r = build_basic_construction(request.getfixturevalue(name))
    assert r.d == order
    assert r.c1.dim == order * order


def test_jones_projection_of_cz2(cz2):
    r = build_basic_construction(cz2)
    assert np.allclose(r.jones, np.diag([1.0, 0.0]))
    assert np.allclose(r.e_proj[0], r.jones)
    assert np.allclose(r.e_proj[1], np.diag([0.0, 1.0]))


def test_rho_is_multiplicative(pauli):
    r = build_basic_construction(pauli)
    x, y = SIGMA_X, pauli.fibers[1].basis[0]
    assert np.allclose(r.rho(x @ y), r.rho(x) @ r.rho(y))
    assert np.allclose(r.rho(I2), np.eye(r.d))


def test_e_projections_resolve_the_unit(bundle):
    r = build_basic_construction(bundle)
    assert np.linalg.norm(sum(r.e_proj) - np.eye(r.d)) <= 1e-8
    for p in r.e_proj:
        assert np.linalg.norm(p @ p - p) <= 1e-8
    assert r.report.get("e.witness_independent").status == "pass"


def test_alpha_fixes_c_and_squares_to_identity(cz2):
    r = build_basic_construction(cz2)
    for c in r.embedded_c.space.basis:
        assert np.allclose(r.action(1, c), c)
    for y in r.c1.space.basis:
        assert np.allclose(r.action(1, r.action(1, y)), y, atol=1e-10)
    assert np.allclose(r.action(1, r.jones), r.e_proj[1])


def test_theta_recovers_rho(pauli):
    r = build_basic_construction(pauli)
    for t in pauli.group.elements:
        for x in pauli.fibers[t].basis:
            assert np.allclose(theta(r, r.jones @ r.rho(x)), r.rho(x), atol=1e-10)


def test_a1_bundle_isomorphism(bundle):
    r = build_basic_construction(bundle)
    a1 = bundle_A1_and_iso(r, bundle)
    assert a1.report.passed
    assert tuple(y.dim for y in a1.fibers) == bundle.dims
    assert a1.bundle.dims == bundle.dims
    assert a1.bundle.ambient == r.d
    assert tuple(y.dim for y in a1_fibers(r)) == bundle.dims


def test_unsaturated_bundle_rejected():
    zero = make_bundle(cyclic_group(2), [[I2], []], n=2)
    with pytest.raises(NotSaturated):
        build_basic_construction(zero)


def test_tau_coordinates_of_the_adapted_basis(pauli):
    r = build_basic_construction(pauli)
    for k, q in enumerate(r.tau_basis):
        assert np.allclose(tau_coordinates(r, q), np.eye(r.d)[k], atol=1e-10)


def test_jones_projection_is_checked(bundle):
    r = build_basic_construction(bundle)
    rec = r.report.get("jones.projection")
    assert rec.status == "pass"
    assert rec.residual is not None and rec.residual <= 1e-12
    commute = r.report.get("jones.commutes_with_A")
    assert commute.status == "pass"
    for a in bundle.unit_fiber.basis:
        assert np.allclose(r.jones @ r.rho(a), r.rho(a) @ r.jones, atol=1e-10)
