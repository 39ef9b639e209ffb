import pytest

from fellmorita.algebra.matspace import zero_space
from fellmorita.bundles.basic_construction import build_basic_construction
from fellmorita.bundles.bimodule import make_bimodule
from fellmorita.bundles.bundle import relabel_bundle
from fellmorita.bundles.equivalence import make_bimodule_action, relabel_action
from fellmorita.bundles.reconstruction import (
    ReconstructionInput,
    build_Z_bundle,
    hypothesis_report,
    roundtrip_factory,
    search_automorphism,
    verify_theorem_conclusion,
)
from fellmorita.errors import EmptyFiber, NoAutomorphismFound


@pytest.mark.parametrize("name", ["cz2", "cz3", "cz4"])
def test_roundtrip_finds_identity(request, name):
    b = request.getfixturevalue(name)
    found = search_automorphism(b, b, roundtrip_factory)
    assert found.f == tuple(b.group.elements)
    assert found.report.passed
    assert found.equivalence.dims == b.dims


def test_search_recovers_the_relabeling(cz4):
    inverted = relabel_bundle(cz4, [0, 3, 2, 1])
    found = search_automorphism(cz4, inverted, roundtrip_factory)
    assert found.f == (0, 3, 2, 1)
    assert verify_theorem_conclusion(found.equivalence, found.f).passed


def test_search_is_thread_independent(cz4):
    inverted = relabel_bundle(cz4, [0, 3, 2, 1])
    serial = search_automorphism(cz4, inverted, roundtrip_factory, max_workers=1)
    threaded = search_automorphism(cz4, inverted, roundtrip_factory, max_workers=4)
    assert serial.f == threaded.f


def test_wrong_automorphism_fails_the_conclusion(cz4):
    inverted = relabel_bundle(cz4, [0, 3, 2, 1])
    found = search_automorphism(cz4, inverted, roundtrip_factory)
    report = verify_theorem_conclusion(found.equivalence, (0, 1, 2, 3))
    assert not report.passed
    assert report.get("conclusion.right[0,1]").status == "fail"
    assert report.get("conclusion.left[0,1]").status == "pass"


def test_no_automorphism_between_different_algebras(cz2, pauli_z2):
    with pytest.raises(NoAutomorphismFound):
        search_automorphism(cz2, pauli_z2, roundtrip_factory)


def test_no_automorphism_between_different_groups(cz2, cz3):
    with pytest.raises(NoAutomorphismFound):
        search_automorphism(cz2, cz3, roundtrip_factory)


def test_hypothesis_is_recorded_not_enforced(cz2):
    report = hypothesis_report(cz2)
    rec = report.get("relative_commutant")
    assert rec.status == "skip"
    assert rec.residual == 2.0
    assert report.passed


def test_roundtrip_report_contains_diamond_and_frames(cz2):
    bc = build_basic_construction(cz2)
    f = (0, 1)
    z, lam = roundtrip_factory(f, bc, bc)
    built = build_Z_bundle(ReconstructionInput(cz2, cz2, bc, bc, f, z, lam))
    assert built.report.passed
    assert built.report.get("diamond.left_inner[1]").status == "pass"
    assert built.report.get("frames.W.right_basis").status == "pass"
    assert built.report.get("hypothesis.relative_commutant").status == "skip"


def test_zero_bimodule_gives_empty_fiber(cz2):
    bc = build_basic_construction(cz2)
    f = (0, 1)
    z = make_bimodule(bc.c1, bc.c1, zero_space(bc.d, bc.d))
    lam = make_bimodule_action(
        z,
        bc.action,
        relabel_action(bc.action, f),
        {t: (lambda x: x) for t in cz2.group.elements},
    )
    with pytest.raises(EmptyFiber):
        build_Z_bundle(ReconstructionInput(cz2, cz2, bc, bc, f, z, lam))
