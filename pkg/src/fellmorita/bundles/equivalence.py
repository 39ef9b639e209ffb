"""
Equivalence bundles between two bundles over the same group, group actions
on algebras and bimodules, and the crossed-product constructor that turns
an equivariant equivalence bimodule into an equivalence bundle.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from fellmorita.algebra.group import FiniteGroup
from fellmorita.algebra.matspace import (
    DEFAULT_TOL,
    CMatrix,
    LinearMap,
    MatSubspace,
    adjoint_span,
    as_cmatrix,
    dagger,
    equality_residual,
    product_span,
    rel_residual,
    span,
    subspace_residual,
    sum_spaces,
)
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra
from fellmorita.bundles.bimodule import (
    ConcreteBimodule,
    InclusionMoritaDatum,
    check_inclusion_morita,
)
from fellmorita.bundles.bundle import GradedCStarBundle, make_bundle
from fellmorita.errors import AssemblyFailure, IncompatibleActions, ShapeMismatch
from fellmorita.parallel import map_indexed
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8

ANCHOR_EQUIVALENCE = "equivalence-bundle"
ANCHOR_ASSEMBLY = "inclusion-morita"
ANCHOR_ACTION = "group-action"
ANCHOR_CROSSED = "crossed-product"


@dataclass(frozen=True, eq=False)
class EquivalenceBundle:
    """
    Fibers X_t ⊆ n×m between bundle_a (in M_n) and bundle_b (in M_m).

    When bundle_b was obtained by relabeling another bundle along a group
    automorphism, `b_source` keeps the bundle before relabeling.
    """

    bundle_a: GradedCStarBundle
    bundle_b: GradedCStarBundle
    fibers: Tuple[MatSubspace, ...]
    b_source: Optional[GradedCStarBundle] = None

    @property
    def group(self) -> FiniteGroup:
        return self.bundle_a.group

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.dim for f in self.fibers)


def make_equivalence_bundle(
    bundle_a: GradedCStarBundle,
    bundle_b: GradedCStarBundle,
    fibers: Sequence[MatSubspace | Sequence[object]],
    *,
    b_source: Optional[GradedCStarBundle] = None,
) -> EquivalenceBundle:
    if bundle_a.group.table != bundle_b.group.table:
        raise ShapeMismatch("bundles are graded by different groups")
    shape = (bundle_a.ambient, bundle_b.ambient)
    tol = max(bundle_a.tol, bundle_b.tol)
    spaces = []
    for t, f in enumerate(fibers):
        s = f if isinstance(f, MatSubspace) else span(f, tol, shape=shape)
        if s.shape != shape:
            raise ShapeMismatch(f"fiber {t} lives in {s.shape}, expected {shape}")
        spaces.append(s)
    if len(spaces) != bundle_a.group.order:
        raise ShapeMismatch(f"expected {bundle_a.group.order} fibers, got {len(spaces)}")
    return EquivalenceBundle(bundle_a, bundle_b, tuple(spaces), b_source)


def identity_equivalence_bundle(b: GradedCStarBundle) -> EquivalenceBundle:
    """X_t = A_t between a bundle and itself."""
    return EquivalenceBundle(bundle_a=b, bundle_b=b, fibers=tuple(b.fibers))


# ---------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------
CheckResult = Tuple[str, str, float, float, str]


def _pair_checks(e: EquivalenceBundle, t: int, s: int) -> List[CheckResult]:
    g = e.group
    a, b, x = e.bundle_a.fibers, e.bundle_b.fibers, e.fibers
    tol = max(e.bundle_a.tol, e.bundle_b.tol)
    out: List[CheckResult] = []

    res = subspace_residual(x[g.mul(t, s)], product_span(a[t], x[s]))
    out.append((f"left_action[{t},{s}]", ANCHOR_EQUIVALENCE, res, tol, ""))
    res = subspace_residual(x[g.mul(t, s)], product_span(x[t], b[s]))
    out.append((f"right_action[{t},{s}]", ANCHOR_EQUIVALENCE, res, tol, ""))

    ts_inv = g.mul(t, g.inv(s))
    res = equality_residual(product_span(x[t], adjoint_span(x[s])), a[ts_inv])
    out.append((f"left_fullness[{t},{s}]", ANCHOR_EQUIVALENCE, res, tol, f"X_t·X_s* vs A_{ts_inv}"))
    t_inv_s = g.mul(g.inv(t), s)
    res = equality_residual(product_span(adjoint_span(x[t]), x[s]), b[t_inv_s])
    out.append((f"right_fullness[{t},{s}]", ANCHOR_EQUIVALENCE, res, tol, f"X_t*·X_s vs B_{t_inv_s}"))
    return out


def verify_equivalence_bundle(e: EquivalenceBundle, *, max_workers: Optional[int] = None) -> Report:
    """Every condition keyed (condition, t, s); (t, s) pairs may be checked in parallel."""
    report = Report()
    g = e.group
    pairs = [(t, s) for t in g.elements for s in g.elements]
    results = map_indexed(lambda ts: _pair_checks(e, *ts), pairs, max_workers=max_workers)
    for chunk in results:
        for rid, anchor, res, tol, msg in chunk:
            report.check(rid, anchor, res, tol, message=msg if res > tol else "")

    total = sum_spaces(*e.fibers)
    report.add(
        "fibers.independent",
        ANCHOR_EQUIVALENCE,
        total.dim == sum(e.dims),
        residual=float(sum(e.dims) - total.dim),
    )
    e_dim = e.fibers[g.identity].dim
    for t in g.elements:
        report.add(
            f"fiber_dimension[{t}]",
            ANCHOR_EQUIVALENCE,
            e.fibers[t].dim == e_dim,
            residual=float(abs(e.fibers[t].dim - e_dim)),
        )
    return report.sorted()


def assemble_total(e: EquivalenceBundle, *, max_workers: Optional[int] = None) -> InclusionMoritaDatum:
    """Y = ⊕X_t as a C–D bimodule with X = X_e; raises unless the datum checks out."""
    bundle_report = verify_equivalence_bundle(e, max_workers=max_workers)
    datum = InclusionMoritaDatum(
        big=ConcreteBimodule(
            left=e.bundle_a.total_algebra,
            right=e.bundle_b.total_algebra,
            space=sum_spaces(*e.fibers),
        ),
        small_space=e.fibers[e.group.identity],
        small_left=e.bundle_a.fiber_algebra,
        small_right=e.bundle_b.fiber_algebra,
    )
    morita = check_inclusion_morita(datum)
    if not (bundle_report.passed and morita.passed):
        combined = Report().extend(bundle_report, "bundle").extend(morita, "datum")
        ids = ", ".join(r.id for r in combined.failures()[:5])
        raise AssemblyFailure(f"total bimodule is not a C–D equivalence for this inclusion ({ids})", report=combined)
    return datum


# ---------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ActionSystem:
    algebra: ConcreteStarAlgebra
    group: FiniteGroup
    maps: Tuple[LinearMap, ...]

    def __call__(self, t: int, x: CMatrix) -> CMatrix:
        return self.maps[t](x)


def make_action(
    algebra: ConcreteStarAlgebra,
    group: FiniteGroup,
    fns: Mapping[int, Callable[[CMatrix], CMatrix]],
) -> ActionSystem:
    maps = tuple(LinearMap.from_function(algebra.space, algebra.space, fns[t]) for t in group.elements)
    return ActionSystem(algebra=algebra, group=group, maps=maps)


def inner_action(
    algebra: ConcreteStarAlgebra,
    group: FiniteGroup,
    unitaries: Mapping[int, object],
) -> ActionSystem:
    """α_t = Ad(u_t)."""
    us = {t: as_cmatrix(unitaries[t]) for t in group.elements}
    return make_action(algebra, group, {t: (lambda x, u=us[t]: u @ x @ dagger(u)) for t in group.elements})


def matrix_action(
    algebra: ConcreteStarAlgebra,
    group: FiniteGroup,
    basis: Sequence[CMatrix],
    matrices: Mapping[int, np.ndarray],
) -> ActionSystem:
    """α_t(b_j) = Σ_i M_t[i, j]·b_i over a spanning family {b_j} of the algebra."""
    k = len(basis)
    maps = []
    for t in group.elements:
        mt = np.asarray(matrices[t], dtype=np.complex128)
        if mt.shape != (k, k):
            raise ShapeMismatch(f"action map for {t} has shape {mt.shape}, expected {(k, k)}")
        images = [sum((mt[i, j] * basis[i] for i in range(k)), start=np.zeros_like(basis[0])) for j in range(k)]
        maps.append(LinearMap.from_pairs(algebra.space, algebra.space, basis, images))
    return ActionSystem(algebra, group, tuple(maps))


def trivial_action(algebra: ConcreteStarAlgebra, group: FiniteGroup) -> ActionSystem:
    return ActionSystem(algebra, group, tuple(LinearMap.identity(algebra.space) for _ in group.elements))


def relabel_action(act: ActionSystem, f: Sequence[int]) -> ActionSystem:
    """β_t = α_{f(t)}."""
    return ActionSystem(act.algebra, act.group, tuple(act.maps[f[t]] for t in act.group.elements))


def _composition_residual(maps: Sequence[LinearMap], g: FiniteGroup) -> float:
    worst = 0.0
    for s in g.elements:
        for t in g.elements:
            st = maps[g.mul(s, t)]
            for q in maps[t].domain.basis:
                lhs = maps[s](maps[t](q))
                worst = max(worst, rel_residual(lhs - st(q), lhs))
    return worst


def _identity_residual(m: LinearMap) -> float:
    return max((rel_residual(m(q) - q, q) for q in m.domain.basis), default=0.0)


def verify_action(act: ActionSystem) -> Report:
    """Each α_t is a unital *-automorphism; α_e = id; α_s∘α_t = α_st."""
    report = Report()
    basis = act.algebra.space.basis
    unit = act.algebra.unit
    for t in act.group.elements:
        m = act.maps[t]
        report.check(f"action.well_defined[{t}]", ANCHOR_ACTION, m.residual, CHECK_TOL)
        mult = 0.0
        for x in basis:
            mx = m(x)
            for y in basis:
                lhs = m(x @ y)
                mult = max(mult, rel_residual(lhs - mx @ m(y), lhs))
        report.check(f"action.multiplicative[{t}]", ANCHOR_ACTION, mult, CHECK_TOL)
        adj = max((rel_residual(m(dagger(x)) - dagger(m(x)), x) for x in basis), default=0.0)
        report.check(f"action.adjoint[{t}]", ANCHOR_ACTION, adj, CHECK_TOL)
        report.check(f"action.unital[{t}]", ANCHOR_ACTION, rel_residual(m(unit) - unit, unit), CHECK_TOL)
        report.add(f"action.invertible[{t}]", ANCHOR_ACTION, m.is_bijective())
    report.check("action.identity", ANCHOR_ACTION, _identity_residual(act.maps[act.group.identity]), CHECK_TOL)
    report.check("action.composition", ANCHOR_ACTION, _composition_residual(act.maps, act.group), CHECK_TOL)
    return report


@dataclass(frozen=True, eq=False)
class BimoduleAction:
    bimodule: ConcreteBimodule
    group: FiniteGroup
    maps: Tuple[LinearMap, ...]
    left_action: ActionSystem
    right_action: ActionSystem

    def __call__(self, t: int, x: CMatrix) -> CMatrix:
        return self.maps[t](x)


def make_bimodule_action(
    bimodule: ConcreteBimodule,
    left_action: ActionSystem,
    right_action: ActionSystem,
    fns: Mapping[int, Callable[[CMatrix], CMatrix]],
) -> BimoduleAction:
    g = left_action.group
    maps = tuple(LinearMap.from_function(bimodule.space, bimodule.space, fns[t]) for t in g.elements)
    return BimoduleAction(bimodule, g, maps, left_action, right_action)


def inner_bimodule_action(
    bimodule: ConcreteBimodule,
    left_action: ActionSystem,
    right_action: ActionSystem,
    left_unitaries: Mapping[int, object],
    right_unitaries: Mapping[int, object],
) -> BimoduleAction:
    """λ_t(x) = u_t·x·v_t*."""
    g = left_action.group
    us = {t: as_cmatrix(left_unitaries[t]) for t in g.elements}
    vs = {t: as_cmatrix(right_unitaries[t]) for t in g.elements}
    fns = {t: (lambda x, u=us[t], v=vs[t]: u @ x @ dagger(v)) for t in g.elements}
    return make_bimodule_action(bimodule, left_action, right_action, fns)


def verify_bimodule_action(lam: BimoduleAction) -> Report:
    """Covariance of λ with α (left) and β (right), on actions and on both inner products."""
    report = Report()
    alpha, beta = lam.left_action, lam.right_action
    xs = lam.bimodule.space.basis
    for t in lam.group.elements:
        m = lam.maps[t]
        report.check(f"lambda.well_defined[{t}]", ANCHOR_ACTION, m.residual, CHECK_TOL)
        left = right = linner = rinner = 0.0
        for x in xs:
            lx = m(x)
            for a in alpha.algebra.space.basis:
                lhs = m(a @ x)
                left = max(left, rel_residual(lhs - alpha(t, a) @ lx, lhs))
            for b in beta.algebra.space.basis:
                lhs = m(x @ b)
                right = max(right, rel_residual(lhs - lx @ beta(t, b), lhs))
            for y in xs:
                ly = m(y)
                lhs = lx @ dagger(ly)
                linner = max(linner, rel_residual(lhs - alpha(t, x @ dagger(y)), lhs))
                lhs = dagger(lx) @ ly
                rinner = max(rinner, rel_residual(lhs - beta(t, dagger(x) @ y), lhs))
        report.check(f"lambda.left_covariance[{t}]", ANCHOR_ACTION, left, CHECK_TOL)
        report.check(f"lambda.right_covariance[{t}]", ANCHOR_ACTION, right, CHECK_TOL)
        report.check(f"lambda.left_inner[{t}]", ANCHOR_ACTION, linner, CHECK_TOL)
        report.check(f"lambda.right_inner[{t}]", ANCHOR_ACTION, rinner, CHECK_TOL)
    report.check("lambda.identity", ANCHOR_ACTION, _identity_residual(lam.maps[lam.group.identity]), CHECK_TOL)
    report.check("lambda.composition", ANCHOR_ACTION, _composition_residual(lam.maps, lam.group), CHECK_TOL)
    return report


# ---------------------------------------------------------------------
# crossed products on the regular representation
# ---------------------------------------------------------------------
class RegularRepresentation:
    """
    Covariant representation on block vectors ξ = (ξ(t))_t:
    (π(a)ξ)(t) = α_{t⁻¹}(a)ξ(t) and (λ_s ξ)(t) = ξ(s⁻¹t); the bimodule uses
    the same recipe on rectangular blocks.
    """

    def __init__(self, alpha: ActionSystem, beta: ActionSystem, lam: BimoduleAction) -> None:
        self.g = alpha.group
        self.alpha, self.beta, self.lam = alpha, beta, lam
        self.n = alpha.algebra.n
        self.m = beta.algebra.n

    def _diag(self, blocks: Sequence[CMatrix], rows: int, cols: int) -> CMatrix:
        size = self.g.order
        out = np.zeros((rows * size, cols * size), dtype=np.complex128)
        for t, blk in enumerate(blocks):
            out[t * rows:(t + 1) * rows, t * cols:(t + 1) * cols] = blk
        return out

    def pi_a(self, a: CMatrix) -> CMatrix:
        return self._diag([self.alpha(self.g.inv(t), a) for t in self.g.elements], self.n, self.n)

    def pi_b(self, b: CMatrix) -> CMatrix:
        return self._diag([self.beta(self.g.inv(t), b) for t in self.g.elements], self.m, self.m)

    def pi_x(self, x: CMatrix) -> CMatrix:
        return self._diag([self.lam(self.g.inv(t), x) for t in self.g.elements], self.n, self.m)

    def _shift(self, s: int, k: int) -> CMatrix:
        size = self.g.order
        out = np.zeros((k * size, k * size), dtype=np.complex128)
        s_inv = self.g.inv(s)
        for t in self.g.elements:
            src = self.g.mul(s_inv, t)
            out[t * k:(t + 1) * k, src * k:(src + 1) * k] = np.eye(k)
        return out

    def shift_a(self, s: int) -> CMatrix:
        return self._shift(s, self.n)

    def shift_b(self, s: int) -> CMatrix:
        return self._shift(s, self.m)


class CrossedProductSystem(NamedTuple):
    bundle_a: GradedCStarBundle
    bundle_b: GradedCStarBundle
    equivalence: EquivalenceBundle


def crossed_product_system(
    alpha: ActionSystem,
    beta: ActionSystem,
    lam: BimoduleAction,
    tol: float = DEFAULT_TOL,
) -> CrossedProductSystem:
    """A⋊G, B⋊G and the fibers X_t = π_X(X)·λ_t of the crossed-product bimodule."""
    for name, rep in (("alpha", verify_action(alpha)), ("beta", verify_action(beta)), ("lambda", verify_bimodule_action(lam))):
        if not rep.passed:
            ids = ", ".join(r.id for r in rep.failures()[:5])
            raise IncompatibleActions(f"{name} fails covariance checks: {ids}")

    rep = RegularRepresentation(alpha, beta, lam)
    g = alpha.group
    size = g.order
    a_fibers = [[rep.pi_a(a) @ rep.shift_a(t) for a in alpha.algebra.space.basis] for t in g.elements]
    b_fibers = [[rep.pi_b(b) @ rep.shift_b(t) for b in beta.algebra.space.basis] for t in g.elements]
    x_fibers = [
        span([rep.pi_x(x) @ rep.shift_b(t) for x in lam.bimodule.space.basis], tol, shape=(rep.n * size, rep.m * size))
        for t in g.elements
    ]
    bundle_a = make_bundle(g, a_fibers, n=rep.n * size, tol=tol, name="A⋊G")
    bundle_b = make_bundle(g, b_fibers, n=rep.m * size, tol=tol, name="B⋊G")
    logger.info("crossed products built: dims %s / %s", bundle_a.dims, bundle_b.dims)
    return CrossedProductSystem(bundle_a, bundle_b, make_equivalence_bundle(bundle_a, bundle_b, x_fibers))


def crossed_product_formulas(alpha: ActionSystem, beta: ActionSystem, lam: BimoduleAction) -> Report:
    """
    The module structure of X⋊G on spanning sets:
      (a u_t)(x w_s) = (a·λ_t(x)) w_ts,  (x w_t)(b v_s) = (x·β_t(b)) w_ts,
      ₗ⟨x w_t, y w_s⟩ = ₗ⟨x, λ_{ts⁻¹}(y)⟩ u_{ts⁻¹},  ⟨x w_t, y w_s⟩ᵣ = β_{t⁻¹}(⟨x, y⟩ᵣ) v_{t⁻¹s}.
    """
    rep = RegularRepresentation(alpha, beta, lam)
    g = alpha.group
    xs = lam.bimodule.space.basis
    left = right = linner = rinner = 0.0
    for t in g.elements:
        for s in g.elements:
            ts = g.mul(t, s)
            ts_inv = g.mul(t, g.inv(s))
            t_inv_s = g.mul(g.inv(t), s)
            for x in xs:
                xw_t = rep.pi_x(x) @ rep.shift_b(t)
                for a in alpha.algebra.space.basis:
                    lhs = rep.pi_a(a) @ rep.shift_a(t) @ rep.pi_x(x) @ rep.shift_b(s)
                    rhs = rep.pi_x(a @ lam(t, x)) @ rep.shift_b(ts)
                    left = max(left, rel_residual(lhs - rhs, lhs))
                for b in beta.algebra.space.basis:
                    lhs = xw_t @ rep.pi_b(b) @ rep.shift_b(s)
                    rhs = rep.pi_x(x @ beta(t, b)) @ rep.shift_b(ts)
                    right = max(right, rel_residual(lhs - rhs, lhs))
                for y in xs:
                    yw_s = rep.pi_x(y) @ rep.shift_b(s)
                    lhs = xw_t @ dagger(yw_s)
                    rhs = rep.pi_a(x @ dagger(lam(ts_inv, y))) @ rep.shift_a(ts_inv)
                    linner = max(linner, rel_residual(lhs - rhs, lhs))
                    lhs = dagger(xw_t) @ yw_s
                    rhs = rep.pi_b(beta(g.inv(t), dagger(x) @ y)) @ rep.shift_b(t_inv_s)
                    rinner = max(rinner, rel_residual(lhs - rhs, lhs))
    report = Report()
    report.check("crossed.left_action", ANCHOR_CROSSED, left, CHECK_TOL)
    report.check("crossed.right_action", ANCHOR_CROSSED, right, CHECK_TOL)
    report.check("crossed.left_inner", ANCHOR_CROSSED, linner, CHECK_TOL)
    report.check("crossed.right_inner", ANCHOR_CROSSED, rinner, CHECK_TOL)
    return report
