"""
Rebuilding an equivalence bundle from the basic constructions of two
bundles: given an automorphism f and a C₁–D₁ equivalence bimodule Z with a
compatible action λ, the fibers Z_t = e_A·Z·β_t(e_B) form an 𝒜₁–ℬ₁^f
equivalence bundle.

Bundle operations on Y_t, Z_t and the B-side fibers are the twisted ones
(x•y = x·α_t(y) and so on). They are carried to plain matrix products by
the maps Θ(y) = Σ_s α_s(y) and Θ_W(w) = Σ_s λ_s(w), and every identity is
checked in the transported picture against its twisted definition.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import logfire
import numpy as np

from fellmorita.algebra.group import Permutation, automorphisms
from fellmorita.algebra.matspace import (
    CMatrix,
    MatSubspace,
    adjoint_span,
    dagger,
    equality_residual,
    fro,
    product_span,
    rel_residual,
    span,
    sum_spaces,
)
from fellmorita.algebra.star_algebra import relative_commutant
from fellmorita.bundles.basic_construction import (
    A1Bundle,
    BasicConstructionResult,
    build_basic_construction,
    bundle_A1_and_iso,
    theta,
)
from fellmorita.bundles.bimodule import ConcreteBimodule, left_frame, make_bimodule, right_frame
from fellmorita.bundles.bundle import GradedCStarBundle, relabel_bundle, saturation_witness
from fellmorita.bundles.equivalence import (
    ActionSystem,
    BimoduleAction,
    EquivalenceBundle,
    make_bimodule_action,
    make_equivalence_bundle,
    relabel_action,
    verify_bimodule_action,
    verify_equivalence_bundle,
)
from fellmorita.config import settings
from fellmorita.errors import (
    CovarianceViolation,
    EmptyFiber,
    FellMoritaError,
    NoAutomorphismFound,
    ShapeMismatch,
)
from fellmorita.parallel import map_indexed
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8

ANCHOR_Z = "reconstructed-bundle"
ANCHOR_DIAMOND = "diamond-structure"
ANCHOR_THEOREM = "automorphism-equivalence"
ANCHOR_HYPOTHESIS = "irreducible-inclusion"


@dataclass(frozen=True, eq=False)
class ReconstructionInput:
    bundle_a: GradedCStarBundle
    bundle_b: GradedCStarBundle
    bc_a: BasicConstructionResult
    bc_b: BasicConstructionResult
    f: Permutation
    z: ConcreteBimodule
    lam: BimoduleAction

    @property
    def beta(self) -> ActionSystem:
        """β_t = α^ℬ_{f(t)}."""
        assert self.bc_b.action is not None
        return relabel_action(self.bc_b.action, self.f)


class ZBundleResult(NamedTuple):
    equivalence: EquivalenceBundle
    report: Report


# (f, bc_a, bc_b) -> (Z, λ)
ZFactory = Callable[[Permutation, BasicConstructionResult, BasicConstructionResult], Tuple[ConcreteBimodule, BimoduleAction]]


def _theta_w(lam: BimoduleAction, w: CMatrix) -> CMatrix:
    return sum((lam(s, w) for s in lam.group.elements), start=np.zeros_like(w))


def _map_deviation(a: ActionSystem, b: ActionSystem) -> float:
    return max((a.maps[t].deviation(b.maps[t]) for t in a.group.elements), default=0.0)


def covariance_report(inp: ReconstructionInput) -> Report:
    g = inp.bundle_a.group
    report = Report()
    report.add("f.automorphism", ANCHOR_THEOREM, g.is_automorphism(inp.f), message=f"f={list(inp.f)}")
    report.extend(verify_bimodule_action(inp.lam))
    assert inp.bc_a.action is not None
    report.check("lambda.left_is_alpha", ANCHOR_Z, _map_deviation(inp.lam.left_action, inp.bc_a.action), CHECK_TOL)
    report.check("lambda.right_is_beta", ANCHOR_Z, _map_deviation(inp.lam.right_action, inp.beta), CHECK_TOL)
    return report


def build_Z_bundle(inp: ReconstructionInput, *, max_workers: Optional[int] = None) -> ZBundleResult:
    """
    Z_t = e_A·Z·β_t(e_B) transported into the 𝒜₁–ℬ₁^f picture, with the
    diamond-structure agreement, frame and resolution checks in the report.
    """
    if inp.bundle_a.group.table != inp.bundle_b.group.table:
        raise ShapeMismatch("bundles are graded by different groups")
    g = inp.bundle_a.group
    cov = covariance_report(inp)
    if not cov.passed:
        ids = ", ".join(r.id for r in cov.failures()[:5])
        raise CovarianceViolation(f"(Z, λ) is not covariant for f={list(inp.f)}: {ids}")

    beta = inp.beta
    e_a, e_b = inp.bc_a.jones, inp.bc_b.jones
    shape = inp.z.shape
    tol = inp.z.space.tol
    raw = []
    for t in g.elements:
        right = beta(t, e_b)
        fiber = span([e_a @ z @ right for z in inp.z.space.basis], tol, shape=shape)
        if fiber.dim == 0:
            raise EmptyFiber(f"Z_{t} = e_A·Z·β_{t}(e_B) is zero")
        raw.append(fiber)

    a1 = bundle_A1_and_iso(inp.bc_a, inp.bundle_a)
    b1 = bundle_A1_and_iso(inp.bc_b, inp.bundle_b)
    transported = [span([_theta_w(inp.lam, w) for w in fiber.basis], tol, shape=shape) for fiber in raw]
    equivalence = make_equivalence_bundle(
        a1.bundle,
        relabel_bundle(b1.bundle, inp.f),
        transported,
        b_source=b1.bundle,
    )
    logger.info("Z bundle for f=%s: fiber dims %s", list(inp.f), equivalence.dims)

    report = Report().extend(cov, prefix="covariance")
    report.extend(_diamond_report(inp, raw, a1, b1), prefix="diamond")
    report.extend(_frame_report(inp, raw), prefix="frames")
    report.extend(verify_equivalence_bundle(equivalence, max_workers=max_workers), prefix="bundle")
    report.extend(hypothesis_report(inp.bundle_a), prefix="hypothesis")
    return ZBundleResult(equivalence, report)


def _diamond_report(
    inp: ReconstructionInput,
    raw: Sequence[MatSubspace],
    a1: A1Bundle,
    b1: A1Bundle,
) -> Report:
    """The twisted actions and inner products agree with plain products after transport."""
    g = inp.bundle_a.group
    beta, lam, f = inp.beta, inp.lam, inp.f
    alpha = inp.bc_a.action
    assert alpha is not None
    report = Report()

    def theta_b(d: CMatrix) -> CMatrix:
        return theta(inp.bc_b, d)

    for t in g.elements:
        left = right = linner = rinner = 0.0
        for s in g.elements:
            for w in raw[t].basis:
                tw = _theta_w(lam, w)
                for c in a1.fibers[s].basis:
                    lhs = theta(inp.bc_a, c) @ tw
                    rhs = _theta_w(lam, c @ lam(s, w))
                    left = max(left, rel_residual(lhs - rhs, lhs))
                # ℬ^f fiber at s is the raw B-side fiber at f(s)
                for d in b1.fibers[f[s]].basis:
                    lhs = tw @ theta_b(d)
                    rhs = _theta_w(lam, w @ beta(t, d))
                    right = max(right, rel_residual(lhs - rhs, lhs))
                ts_inv = g.mul(t, g.inv(s))
                for w2 in raw[s].basis:
                    tw2 = _theta_w(lam, w2)
                    lhs = tw @ dagger(tw2)
                    rhs = theta(inp.bc_a, w @ dagger(lam(ts_inv, w2)))
                    linner = max(linner, rel_residual(lhs - rhs, lhs))
                    lhs = dagger(tw) @ tw2
                    rhs = theta_b(beta(g.inv(t), dagger(w) @ w2))
                    rinner = max(rinner, rel_residual(lhs - rhs, lhs))
        report.check(f"left_action[{t}]", ANCHOR_DIAMOND, left, CHECK_TOL)
        report.check(f"right_action[{t}]", ANCHOR_DIAMOND, right, CHECK_TOL)
        report.check(f"left_inner[{t}]", ANCHOR_DIAMOND, linner, CHECK_TOL)
        report.check(f"right_inner[{t}]", ANCHOR_DIAMOND, rinner, CHECK_TOL)
    return report


def _frame_report(inp: ReconstructionInput, raw: Sequence[MatSubspace]) -> Report:
    """Resolution of β_t(e_B), W = e_A·Z and the two basis families of W."""
    g = inp.bundle_a.group
    beta = inp.beta
    e_a, e_b = inp.bc_a.jones, inp.bc_b.jones
    d_b = e_b.shape[0]
    report = Report()

    resolved = sum((beta(t, e_b) for t in g.elements), start=np.zeros((d_b, d_b), dtype=np.complex128))
    report.check("beta_e_B.resolution", ANCHOR_Z, fro(resolved - np.eye(d_b)), CHECK_TOL)

    w_space = sum_spaces(*raw, shape=inp.z.shape)
    corner = span([e_a @ z for z in inp.z.space.basis], inp.z.space.tol, shape=inp.z.shape)
    report.check("W.is_e_A_Z", ANCHOR_Z, equality_residual(w_space, corner), inp.z.space.tol)

    try:
        zs = left_frame(inp.z)
        ws = right_frame(inp.z)
    except FellMoritaError as exc:
        report.add("Z.frames", ANCHOR_Z, False, message=str(exc))
        return report

    # right basis: u_{i,t} = e_A·z_i·β_t(e_B)
    us = [e_a @ z @ beta(t, e_b) for z in zs for t in g.elements]
    # left basis: v = e_A·ρ(x_i^t)*·w_j from the saturation witnesses of 𝒜
    witnesses = [x for t in g.elements for x in saturation_witness(inp.bundle_a, t)]
    vs = [e_a @ dagger(inp.bc_a.rho(x)) @ w for x in witnesses for w in ws]

    right_res = left_res = 0.0
    for x in w_space.basis:
        rebuilt = sum((u @ (dagger(u) @ x) for u in us), start=np.zeros_like(x))
        right_res = max(right_res, rel_residual(rebuilt - x, x))
        rebuilt = sum(((x @ dagger(v)) @ v for v in vs), start=np.zeros_like(x))
        left_res = max(left_res, rel_residual(rebuilt - x, x))
    report.check("W.right_basis", ANCHOR_Z, right_res, CHECK_TOL)
    report.check("W.left_basis", ANCHOR_Z, left_res, CHECK_TOL)

    rng = np.random.default_rng(settings.seed)
    compat = 0.0
    if w_space.dim:
        for _ in range(3):
            x, y, w = (w_space.element(rng.normal(size=w_space.dim) + 1j * rng.normal(size=w_space.dim)) for _ in range(3))
            lhs = (x @ dagger(y)) @ w
            compat = max(compat, rel_residual(lhs - x @ (dagger(y) @ w), lhs))
    report.check("W.inner_products_compatible", ANCHOR_Z, compat, CHECK_TOL)
    return report


def hypothesis_report(b: GradedCStarBundle) -> Report:
    """A′∩C = C·1 is recorded, never enforced."""
    report = Report()
    commutant = relative_commutant(b.fiber_algebra, b.total_algebra)
    report.skip(
        "relative_commutant",
        ANCHOR_HYPOTHESIS,
        message=f"dim A'∩C = {commutant.dim}" + ("" if commutant.dim == 1 else " (inclusion is not irreducible)"),
        residual=float(commutant.dim),
    )
    return report


def verify_theorem_conclusion(e: EquivalenceBundle, f: Sequence[int]) -> Report:
    """
    For all t, s: Z_t·Z_s* spans the A-side fiber at ts⁻¹ and Z_t*·Z_s spans
    the B-side fiber at f(t⁻¹s), both in the transported picture.
    """
    g = e.group
    b_fibers = e.b_source.fibers if e.b_source is not None else None
    tol = max(e.bundle_a.tol, e.bundle_b.tol)
    report = Report()
    for t in g.elements:
        for s in g.elements:
            ts_inv = g.mul(t, g.inv(s))
            res = equality_residual(product_span(e.fibers[t], adjoint_span(e.fibers[s])), e.bundle_a.fibers[ts_inv])
            report.check(f"conclusion.left[{t},{s}]", ANCHOR_THEOREM, res, tol, message=f"A_{ts_inv}")

            t_inv_s = g.mul(g.inv(t), s)
            target = b_fibers[f[t_inv_s]] if b_fibers is not None else e.bundle_b.fibers[t_inv_s]
            res = equality_residual(product_span(adjoint_span(e.fibers[t]), e.fibers[s]), target)
            report.check(f"conclusion.right[{t},{s}]", ANCHOR_THEOREM, res, tol, message=f"B_f({t_inv_s})")
    return report


# ---------------------------------------------------------------------
# factories and search
# ---------------------------------------------------------------------
def intertwiner(bc_a: BasicConstructionResult, bc_b: BasicConstructionResult) -> CMatrix:
    """U with ρ_B(c) = U·ρ_A(c)·U*, for two gradings of one total algebra."""
    ca, cb = bc_a.bundle.total_space, bc_b.bundle.total_space
    if ca.shape != cb.shape or equality_residual(ca, cb) > max(ca.tol, cb.tol):
        raise ShapeMismatch("the two bundles do not share a total algebra")
    return np.stack([bc_b.coordinates(q) for q in bc_a.tau_basis], axis=1)


def roundtrip_factory(
    f: Permutation,
    bc_a: BasicConstructionResult,
    bc_b: BasicConstructionResult,
) -> Tuple[ConcreteBimodule, BimoduleAction]:
    """Z = C₁^A·U*, λ_t(z) = α^A_t(z·U)·U*: the bimodule two gradings of one algebra share."""
    u = intertwiner(bc_a, bc_b)
    assert bc_a.action is not None and bc_b.action is not None
    z = make_bimodule(bc_a.c1, bc_b.c1, [q @ dagger(u) for q in bc_a.c1.space.basis])
    alpha = bc_a.action
    lam = make_bimodule_action(
        z,
        alpha,
        relabel_action(bc_b.action, f),
        {t: (lambda x, t=t: alpha(t, x @ u) @ dagger(u)) for t in alpha.group.elements},
    )
    return z, lam


class SearchResult(NamedTuple):
    f: Permutation
    equivalence: EquivalenceBundle
    report: Report


def search_automorphism(
    bundle_a: GradedCStarBundle,
    bundle_b: GradedCStarBundle,
    factory: ZFactory,
    *,
    max_workers: Optional[int] = None,
) -> SearchResult:
    """First automorphism f (in enumeration order) for which the factory's (Z, λ) reconstructs a valid bundle."""
    with logfire.span("reconstruction.search {group}", group=bundle_a.group.name):
        if bundle_a.group.table != bundle_b.group.table:
            raise NoAutomorphismFound("bundles are graded by different groups")
        bc_a = build_basic_construction(bundle_a)
        bc_b = build_basic_construction(bundle_b)
        candidates = automorphisms(bundle_a.group)

        def attempt(f: Permutation) -> Optional[SearchResult]:
            try:
                z, lam = factory(f, bc_a, bc_b)
                inp = ReconstructionInput(bundle_a, bundle_b, bc_a, bc_b, f, z, lam)
                built = build_Z_bundle(inp, max_workers=1)
            except FellMoritaError as exc:
                logger.debug("candidate f=%s rejected: %s", list(f), exc)
                return None
            report = built.report.extend(verify_theorem_conclusion(built.equivalence, f))
            if not report.passed:
                logger.debug("candidate f=%s fails %d checks", list(f), len(report.failures()))
                return None
            return SearchResult(f, built.equivalence, report)

        outcomes: List[Optional[SearchResult]] = map_indexed(attempt, candidates, max_workers=max_workers)
        for found in outcomes:
            if found is not None:
                logger.info("automorphism found: f=%s", list(found.f))
                return found
        raise NoAutomorphismFound(f"none of {len(candidates)} automorphisms of {bundle_a.group.name} works")
