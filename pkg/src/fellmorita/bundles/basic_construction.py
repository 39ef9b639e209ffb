"""
The basic construction C₁ for A_e ⊆ C with respect to the canonical
expectation, realized on C itself with the inner product τ(x*y),
τ = trace∘E^A. In a τ-orthonormal basis adapted to the grading the Jones
projection is the coordinate projection onto the A_e block.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from fellmorita.algebra.matspace import (
    CMatrix,
    LinearMap,
    MatSubspace,
    dagger,
    equality_residual,
    fro,
    product_span,
    rel_residual,
    span,
)
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra, as_algebra, generate, random_unitary
from fellmorita.bundles.bundle import (
    GradedCStarBundle,
    canonical_expectation,
    grading_components,
    is_saturated,
    make_bundle,
    saturation_witness,
    verify_bundle,
)
from fellmorita.bundles.equivalence import ActionSystem, verify_action
from fellmorita.config import settings
from fellmorita.errors import DegenerateForm, IllDefinedExtension, IsomorphismFailure, NotSaturated
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8

ANCHOR_JONES = "jones-projection"
ANCHOR_PROJECTIONS = "grading-projections"
ANCHOR_DUAL_ACTION = "dual-action"
ANCHOR_A1 = "bundle-isomorphism"


@dataclass(frozen=True, eq=False)
class BasicConstructionResult:
    bundle: GradedCStarBundle
    order: Tuple[int, ...]           # group elements in adapted-basis order, identity first
    tau_basis: Tuple[CMatrix, ...]   # τ-orthonormal basis of C, fiber blocks in `order`
    embedded_c: ConcreteStarAlgebra  # ρ(C)
    jones: CMatrix
    c1: ConcreteStarAlgebra
    report: Report
    e_proj: Tuple[CMatrix, ...] = ()
    action: Optional[ActionSystem] = None

    @property
    def d(self) -> int:
        return len(self.tau_basis)

    def coordinates(self, y: CMatrix) -> np.ndarray:
        """τ-coordinates of y ∈ C in the adapted basis."""
        comps = grading_components(self.bundle, y)
        return np.concatenate(
            [self.bundle.fibers[t].coordinates(comps[t]) for t in self.order]
            + [np.zeros(0, dtype=np.complex128)]
        )

    def rho(self, c: CMatrix) -> CMatrix:
        """Left multiplication by c in the adapted basis."""
        cols = [self.coordinates(c @ f) for f in self.tau_basis]
        return np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.complex128)


def _adapted_basis(b: GradedCStarBundle) -> Tuple[Tuple[int, ...], List[CMatrix]]:
    e = b.group.identity
    order = (e,) + tuple(t for t in b.group.elements if t != e)
    basis: List[CMatrix] = []
    for t in order:
        basis.extend(b.fibers[t].basis)
    return order, basis


def build_basic_construction(b: GradedCStarBundle) -> BasicConstructionResult:
    """C₁ = span ρ(C)·e_A·ρ(C), with the projections e_t and the action α already attached."""
    if not is_saturated(b):
        raise NotSaturated(f"bundle {b.name} is not saturated")

    order, basis = _adapted_basis(b)
    d = len(basis)
    gram = np.array(
        [[np.trace(canonical_expectation(b, dagger(fi) @ fj)) for fj in basis] for fi in basis],
        dtype=np.complex128,
    ).reshape(d, d)
    gram_res = fro(gram - np.eye(d))
    if gram_res > CHECK_TOL:
        raise DegenerateForm(f"τ-Gram matrix of the adapted basis is off the identity by {gram_res:.2e}")

    a_dim = b.unit_fiber.dim
    jones = np.diag([1.0] * a_dim + [0.0] * (d - a_dim)).astype(np.complex128)

    partial = BasicConstructionResult(
        bundle=b,
        order=order,
        tau_basis=tuple(basis),
        embedded_c=None,  # type: ignore[arg-type]
        jones=jones,
        c1=None,  # type: ignore[arg-type]
        report=Report(),
    )
    rhos = [partial.rho(c) for c in basis]
    embedded = as_algebra(span(rhos, b.tol, shape=(d, d)))
    c1 = generate(rhos + [jones], b.tol)
    logger.info("basic construction of %s: d=%d, dim C1=%d", b.name, d, c1.dim)

    report = Report()
    report.check("jones.projection", ANCHOR_JONES, max(fro(jones - dagger(jones)), fro(jones @ jones - jones)), CHECK_TOL)
    commute = max((fro(jones @ ra - ra @ jones) / max(fro(ra), 1.0) for ra in rhos[:a_dim]), default=0.0)
    report.check("jones.commutes_with_A", ANCHOR_JONES, commute, CHECK_TOL)
    implement = 0.0
    for c, rc in zip(basis, rhos):
        lhs = jones @ rc @ jones
        implement = max(implement, rel_residual(lhs - partial.rho(canonical_expectation(b, c)) @ jones, rc))
    report.check("jones.implements_expectation", ANCHOR_JONES, implement, CHECK_TOL)

    sandwich = span([ri @ jones @ rj for ri in rhos for rj in rhos], b.tol, shape=(d, d))
    report.check("c1.spanned_by_CeC", ANCHOR_JONES, equality_residual(sandwich, c1.space), b.tol)
    report.check("c1.unit", ANCHOR_JONES, fro(c1.unit - np.eye(d)), CHECK_TOL)

    witnesses = [x for t in b.group.elements for x in saturation_witness(b, t)]
    resolved = sum((partial.rho(x) @ jones @ dagger(partial.rho(x)) for x in witnesses), start=np.zeros((d, d), dtype=np.complex128))
    report.check("quasi_basis.identity_of_C1", ANCHOR_JONES, fro(resolved - np.eye(d)), CHECK_TOL)

    result = replace(partial, embedded_c=embedded, c1=c1, report=report)
    projections = e_projections(result, b)
    result = replace(result, e_proj=projections.projections, report=report.extend(projections.report))
    maps = tuple(action_alpha(result, t) for t in b.group.elements)
    action = ActionSystem(algebra=c1, group=b.group, maps=maps)
    result = replace(result, action=action)
    result.report.extend(_action_report(result))
    return result


# ---------------------------------------------------------------------
# projections e_t
# ---------------------------------------------------------------------
class EProjections(NamedTuple):
    projections: Tuple[CMatrix, ...]
    report: Report


def _e_from_witnesses(r: BasicConstructionResult, witnesses: List[CMatrix]) -> CMatrix:
    out = np.zeros((r.d, r.d), dtype=np.complex128)
    for x in witnesses:
        rx = r.rho(x)
        out += rx @ r.jones @ dagger(rx)
    return out


def e_projections(r: BasicConstructionResult, b: GradedCStarBundle) -> EProjections:
    """e_t = Σ_i ρ(x_i^t)·e_A·ρ(x_i^t)* together with the checks they must pass."""
    g = b.group
    proj = tuple(_e_from_witnesses(r, saturation_witness(b, t)) for t in g.elements)
    report = Report()
    eye = np.eye(r.d)

    for t in g.elements:
        p = proj[t]
        res = max(fro(p - dagger(p)), fro(p @ p - p))
        report.check(f"e[{t}].projection", ANCHOR_PROJECTIONS, res, CHECK_TOL)
        report.check(f"e[{t}].in_c1", ANCHOR_PROJECTIONS, r.c1.space.distance(p), CHECK_TOL)
        comm = max((fro(p @ r.rho(a) - r.rho(a) @ p) for a in b.unit_fiber.basis), default=0.0)
        report.check(f"e[{t}].commutes_with_A", ANCHOR_PROJECTIONS, comm, CHECK_TOL)

    ortho = max((fro(proj[t] @ proj[s]) for t in g.elements for s in g.elements if t != s), default=0.0)
    report.check("e.orthogonal", ANCHOR_PROJECTIONS, ortho, CHECK_TOL)
    report.check("e.sum_to_unit", ANCHOR_PROJECTIONS, fro(sum(proj) - eye), CHECK_TOL)
    report.check("e.identity_is_jones", ANCHOR_PROJECTIONS, fro(proj[g.identity] - r.jones), CHECK_TOL)

    rng = np.random.default_rng(settings.seed)
    u = random_unitary(b.fiber_algebra, rng)
    indep = 0.0
    for t in g.elements:
        alt = _e_from_witnesses(r, [u @ x for x in saturation_witness(b, t)])
        indep = max(indep, fro(alt - proj[t]))
    report.check("e.witness_independent", ANCHOR_PROJECTIONS, indep, CHECK_TOL)
    return EProjections(proj, report)


# ---------------------------------------------------------------------
# action α on C₁
# ---------------------------------------------------------------------
def action_alpha(r: BasicConstructionResult, t: int) -> LinearMap:
    """ρ(c)·e_A·ρ(c′) ↦ ρ(c)·e_{t⁻¹}·ρ(c′), extended linearly with a consistency certificate."""
    if not r.e_proj:
        raise IllDefinedExtension("e-projections have not been computed")
    target = r.e_proj[r.bundle.group.inv(t)]
    rhos = [r.rho(c) for c in r.tau_basis]
    sources = [ri @ r.jones @ rj for ri in rhos for rj in rhos]
    images = [ri @ target @ rj for ri in rhos for rj in rhos]
    m = LinearMap.from_pairs(r.c1.space, r.c1.space, sources, images)
    if m.residual > CHECK_TOL:
        raise IllDefinedExtension(f"α_{t} is not well defined (residual {m.residual:.2e})")
    return m


def _action_report(r: BasicConstructionResult) -> Report:
    assert r.action is not None
    g = r.bundle.group
    report = Report().extend(verify_action(r.action), prefix="alpha")
    fix = 0.0
    for c in r.embedded_c.space.basis:
        for t in g.elements:
            fix = max(fix, rel_residual(r.action(t, c) - c, c))
    report.check("alpha.fixes_C", ANCHOR_DUAL_ACTION, fix, CHECK_TOL)
    moves = max(fro(r.action(t, r.jones) - r.e_proj[g.inv(t)]) for t in g.elements)
    report.check("alpha.moves_jones", ANCHOR_DUAL_ACTION, moves, CHECK_TOL)
    return report


def theta(r: BasicConstructionResult, y: CMatrix) -> CMatrix:
    """Σ_s α_s(y): carries e_A·ρ(x) back to ρ(x) for homogeneous x."""
    assert r.action is not None
    return sum((r.action(s, y) for s in r.bundle.group.elements), start=np.zeros((r.d, r.d), dtype=np.complex128))


# ---------------------------------------------------------------------
# the bundle 𝒜₁
# ---------------------------------------------------------------------
class A1Bundle(NamedTuple):
    bundle: GradedCStarBundle          # Θ(Y_t), an honest matrix bundle in M_d
    report: Report
    fibers: Tuple[MatSubspace, ...]    # Y_t = e_A·C₁·α_t(e_A) inside C₁


def a1_fibers(r: BasicConstructionResult) -> Tuple[MatSubspace, ...]:
    assert r.action is not None
    out = []
    for t in r.bundle.group.elements:
        right = r.action(t, r.jones)
        out.append(span([r.jones @ q @ right for q in r.c1.space.basis], r.c1.tol, shape=(r.d, r.d)))
    return tuple(out)


def bundle_A1_and_iso(r: BasicConstructionResult, b: GradedCStarBundle) -> A1Bundle:
    """
    Y_t with x•y = x·α_t(y), x^♯ = α_{t⁻¹}(x*), transported to plain matrices by Θ;
    the report certifies π_t(x) = e_A·ρ(x) as an isometric bundle isomorphism.
    """
    assert r.action is not None
    g = b.group
    ys = a1_fibers(r)
    report = Report()
    rng = np.random.default_rng(settings.seed)

    def pi(x: CMatrix) -> CMatrix:
        return r.jones @ r.rho(x)

    for t in g.elements:
        fiber = b.fibers[t]
        report.add(f"pi[{t}].dimension", ANCHOR_A1, ys[t].dim == fiber.dim, residual=float(abs(ys[t].dim - fiber.dim)))
        image = span([pi(x) for x in fiber.basis], b.tol, shape=(r.d, r.d))
        report.add(f"pi[{t}].bijective", ANCHOR_A1, image.dim == fiber.dim and equality_residual(image, ys[t]) <= b.tol)

        iso = 0.0
        samples = list(fiber.basis) + [fiber.element(rng.normal(size=fiber.dim) + 1j * rng.normal(size=fiber.dim)) for _ in range(3)]
        for x in samples:
            nx = float(np.linalg.norm(x, 2))
            if nx > 0:
                iso = max(iso, abs(float(np.linalg.norm(pi(x), 2)) - nx) / nx)
        report.check(f"pi[{t}].isometric", ANCHOR_A1, iso, CHECK_TOL)

        inv = 0.0
        for x in fiber.basis:
            lhs = r.action(g.inv(t), dagger(pi(x)))
            inv = max(inv, rel_residual(lhs - pi(dagger(x)), lhs))
        report.check(f"pi[{t}].involution", ANCHOR_A1, inv, CHECK_TOL)

        back = max((rel_residual(theta(r, pi(x)) - r.rho(x), x) for x in fiber.basis), default=0.0)
        report.check(f"pi[{t}].theta_inverse", ANCHOR_A1, back, CHECK_TOL)

        for s in g.elements:
            mult = 0.0
            for x in fiber.basis:
                for y in b.fibers[s].basis:
                    lhs = pi(x) @ r.action(t, pi(y))
                    mult = max(mult, rel_residual(lhs - pi(x @ y), lhs))
            report.check(f"pi[{t},{s}].multiplicative", ANCHOR_A1, mult, CHECK_TOL)

    transported = make_bundle(
        g,
        [span([theta(r, y) for y in ys[t].basis], b.tol, shape=(r.d, r.d)) for t in g.elements],
        n=r.d,
        tol=b.tol,
        name=f"{b.name}_1",
    )
    report.extend(verify_bundle(transported), prefix="A1")
    report.add("A1.saturated", ANCHOR_A1, is_saturated(transported))

    if not report.passed:
        ids = ", ".join(rec.id for rec in report.failures()[:5])
        raise IsomorphismFailure(f"bundle {b.name} and its basic-construction bundle disagree: {ids}", report=report)
    return A1Bundle(transported, report, ys)


def tau_coordinates(r: BasicConstructionResult, y: CMatrix) -> np.ndarray:
    return r.coordinates(y)
