"""
C*-algebraic bundles over a finite group, all fibers living in one ambient
matrix algebra M_n: grading checks, saturation, the canonical conditional
expectation onto the unit fiber, saturation witnesses and the index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, NamedTuple, Sequence, Tuple, Union

import logfire
import numpy as np

from fellmorita.algebra.group import FiniteGroup
from fellmorita.algebra.matspace import (
    DEFAULT_TOL,
    CMatrix,
    MatSubspace,
    adjoint_span,
    as_cmatrix,
    dagger,
    equality_residual,
    equals,
    fro,
    product_span,
    rel_residual,
    span,
    subspace_residual,
    sum_spaces,
)
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra, as_algebra, inv_sqrt
from fellmorita.errors import (
    NoUnit,
    NotInTotalAlgebra,
    NotPositiveDefinite,
    NotSaturated,
    NotSaturatedAt,
    ShapeMismatch,
)
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8

ANCHOR_BUNDLE = "fell-bundle"
ANCHOR_SATURATION = "saturation"
ANCHOR_EXPECTATION = "conditional-expectation"
ANCHOR_INDEX = "watatani-index"

FiberInput = Union[MatSubspace, Sequence[object]]


@dataclass(frozen=True, eq=False)
class GradedCStarBundle:
    """
    Fibers A_t (t in group order) inside M_n; the total algebra C is their sum
    and the fiber algebra A is A_e. Both are derived lazily, so an invalid
    bundle can still be built and handed to `verify_bundle`.
    """

    group: FiniteGroup
    fibers: Tuple[MatSubspace, ...]
    tol: float = DEFAULT_TOL
    name: str = "A"

    @property
    def ambient(self) -> int:
        return self.fibers[0].rows

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.dim for f in self.fibers)

    def fiber(self, t: int) -> MatSubspace:
        return self.fibers[t]

    @property
    def unit_fiber(self) -> MatSubspace:
        return self.fibers[self.group.identity]

    @cached_property
    def total_space(self) -> MatSubspace:
        return sum_spaces(*self.fibers)

    @cached_property
    def total_algebra(self) -> ConcreteStarAlgebra:
        return as_algebra(self.total_space)

    @cached_property
    def fiber_algebra(self) -> ConcreteStarAlgebra:
        return as_algebra(self.unit_fiber)

    @cached_property
    def _concatenated(self) -> Tuple[np.ndarray, List[slice]]:
        cols, slices, start = [], [], 0
        for f in self.fibers:
            cols.append(f.flat.T)
            slices.append(slice(start, start + f.dim))
            start += f.dim
        return np.hstack(cols), slices

    def __repr__(self) -> str:
        return f"<GradedCStarBundle {self.name} over {self.group!r} in M_{self.ambient} dims={self.dims}>"


def make_bundle(
    group: FiniteGroup,
    fibers: Union[Mapping[int, FiberInput], Sequence[FiberInput]],
    *,
    n: int | None = None,
    tol: float = DEFAULT_TOL,
    name: str = "A",
) -> GradedCStarBundle:
    """Build a bundle from per-element fiber spans (lists of matrices or subspaces)."""
    items = dict(fibers) if isinstance(fibers, Mapping) else dict(enumerate(fibers))
    if sorted(items) != list(group.elements):
        raise ShapeMismatch(f"fibers must be keyed by 0..{group.order - 1}, got {sorted(items)}")

    if n is None:
        for f in items.values():
            if isinstance(f, MatSubspace):
                n = f.rows
                break
            if len(f):
                n = as_cmatrix(f[0]).shape[0]
                break
    if n is None:
        raise ShapeMismatch("cannot infer the ambient size of an all-zero bundle")

    spaces = []
    for t in group.elements:
        f = items[t]
        s = f if isinstance(f, MatSubspace) else span(f, tol, shape=(n, n))
        if s.shape != (n, n):
            raise ShapeMismatch(f"fiber {t} lives in {s.shape}, expected {(n, n)}")
        spaces.append(s)
    return GradedCStarBundle(group=group, fibers=tuple(spaces), tol=tol, name=name)


def relabel_bundle(b: GradedCStarBundle, f: Sequence[int]) -> GradedCStarBundle:
    """The bundle {B_{f(t)}}_t."""
    return GradedCStarBundle(
        group=b.group,
        fibers=tuple(b.fibers[f[t]] for t in b.group.elements),
        tol=b.tol,
        name=f"{b.name}^f",
    )


# ---------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------
def verify_bundle(b: GradedCStarBundle) -> Report:
    with logfire.span("bundle.verify {name}", name=b.name, dims=list(b.dims)):
        report = Report()
        g = b.group
        tol = b.tol

        total_dim = b.total_space.dim
        report.add(
            "fibers.independent",
            ANCHOR_BUNDLE,
            total_dim == sum(b.dims),
            residual=float(sum(b.dims) - total_dim),
            message=f"dim(sum)={total_dim}, sum(dim)={sum(b.dims)}",
        )

        for t in g.elements:
            for s in g.elements:
                prod = product_span(b.fibers[t], b.fibers[s])
                res = subspace_residual(b.fibers[g.mul(t, s)], prod)
                report.check(f"grading[{t},{s}]", ANCHOR_BUNDLE, res, tol, message="" if res <= tol else "GradingViolation")

        for t in g.elements:
            res = equality_residual(adjoint_span(b.fibers[t]), b.fibers[g.inv(t)])
            report.check(f"involution[{t}]", ANCHOR_BUNDLE, res, tol, message="" if res <= tol else "InvolutionViolation")

        try:
            unit = b.total_algebra.unit
        except NoUnit as exc:
            report.add("unit", ANCHOR_BUNDLE, False, message=f"NoUnit: {exc}")
        else:
            res = b.unit_fiber.distance(unit) if fro(unit) > 0 else 0.0
            report.check("unit", ANCHOR_BUNDLE, res, tol, message="unit of C lies in A_e" if res <= tol else "unit outside A_e")

        if not report.passed:
            logger.warning("bundle %s failed %d checks", b.name, len(report.failures()))
        return report


def saturation_residuals(b: GradedCStarBundle) -> Dict[int, float]:
    out = {}
    for t in b.group.elements:
        inner = product_span(b.fibers[t], adjoint_span(b.fibers[t]))
        out[t] = equality_residual(inner, b.unit_fiber)
    return out


def is_saturated(b: GradedCStarBundle) -> bool:
    return all(
        equals(product_span(b.fibers[t], adjoint_span(b.fibers[t])), b.unit_fiber)
        for t in b.group.elements
    )


# ---------------------------------------------------------------------
# grading decomposition and E^A
# ---------------------------------------------------------------------
def grading_components(b: GradedCStarBundle, x: CMatrix) -> Dict[int, CMatrix]:
    """Components x_t ∈ A_t with x = Σ x_t (least squares on the concatenated fiber bases)."""
    x = as_cmatrix(x)
    if x.shape != (b.ambient, b.ambient):
        raise ShapeMismatch(f"element of shape {x.shape} vs ambient M_{b.ambient}")
    mat, slices = b._concatenated
    vec = x.reshape(-1)
    if mat.shape[1] == 0:
        coeffs = np.zeros(0, dtype=np.complex128)
    else:
        coeffs, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    res = rel_residual(mat @ coeffs - vec if mat.shape[1] else vec, x)
    if res > b.tol:
        raise NotInTotalAlgebra(f"element lies outside the total algebra (residual {res:.2e})")
    return {t: b.fibers[t].element(coeffs[slices[t]]) for t in b.group.elements}


def canonical_expectation(b: GradedCStarBundle, x: CMatrix) -> CMatrix:
    return grading_components(b, x)[b.group.identity]


def verify_expectation(b: GradedCStarBundle) -> Report:
    """E∘E = E, A_e-bimodularity and positivity of E^A on basis elements."""
    report = Report()
    e = b.group.identity
    total = b.total_space.basis
    a_basis = b.unit_fiber.basis
    unit = b.total_algebra.unit

    idem = max((rel_residual(canonical_expectation(b, canonical_expectation(b, x)) - canonical_expectation(b, x), x) for x in total), default=0.0)
    report.check("expectation.idempotent", ANCHOR_EXPECTATION, idem, CHECK_TOL)

    fix = max((rel_residual(canonical_expectation(b, a) - a, a) for a in a_basis), default=0.0)
    report.check("expectation.identity_on_A", ANCHOR_EXPECTATION, fix, CHECK_TOL)

    bimod = 0.0
    for x in total:
        ex = canonical_expectation(b, x)
        for a in a_basis:
            for c in a_basis:
                lhs = canonical_expectation(b, a @ x @ c)
                bimod = max(bimod, rel_residual(lhs - a @ ex @ c, lhs))
    report.check("expectation.bimodular", ANCHOR_EXPECTATION, bimod, CHECK_TOL)

    w, v = np.linalg.eigh((unit + dagger(unit)) / 2)
    rng_basis = v[:, w > 0.5]
    worst = 0.0
    for x in total:
        p = canonical_expectation(b, dagger(x) @ x)
        comp = dagger(rng_basis) @ p @ rng_basis
        if comp.size:
            worst = min(worst, float(np.linalg.eigvalsh((comp + dagger(comp)) / 2).min()))
    report.check("expectation.positive", ANCHOR_EXPECTATION, -worst, CHECK_TOL)
    return report


# ---------------------------------------------------------------------
# witnesses, quasi-basis, index
# ---------------------------------------------------------------------
def saturation_witness(b: GradedCStarBundle, t: int) -> List[CMatrix]:
    """Elements x_i ∈ A_t with Σ x_i x_i* = 1, as inv_sqrt(S)·b_k for S = Σ b_k b_k*."""
    fiber = b.fibers[t]
    if fiber.dim == 0:
        raise NotSaturatedAt(t, f"fiber {t} is zero")
    unit = b.total_algebra.unit
    s = sum(q @ dagger(q) for q in fiber.basis)
    try:
        p = inv_sqrt(s, unit=unit, tol=b.tol)
    except NotPositiveDefinite as exc:
        raise NotSaturatedAt(t, f"bundle is not saturated at t={t}: {exc}") from exc
    witnesses = [p @ q for q in fiber.basis]
    res = fro(sum(x @ dagger(x) for x in witnesses) - unit)
    if res > CHECK_TOL:
        raise NotSaturatedAt(t, f"witness sum misses the unit by {res:.2e} at t={t}")
    return witnesses


class QuasiBasis(NamedTuple):
    pairs: List[Tuple[CMatrix, CMatrix]]
    index: CMatrix
    residual: float


def quasi_basis_and_index(b: GradedCStarBundle) -> QuasiBasis:
    """Quasi-basis {(x_i^t, x_i^t*)} for E^A and its index Σ c_j c_j*."""
    if not is_saturated(b):
        raise NotSaturated(f"bundle {b.name} is not saturated")
    pairs: List[Tuple[CMatrix, CMatrix]] = []
    for t in b.group.elements:
        pairs += [(x, dagger(x)) for x in saturation_witness(b, t)]

    index = sum(c @ cs for c, cs in pairs)
    res = 0.0
    for x in b.total_space.basis:
        rebuilt = sum(c @ canonical_expectation(b, cs @ x) for c, cs in pairs)
        res = max(res, rel_residual(rebuilt - x, x))
    logger.debug("quasi-basis of %d pairs for %s, identity residual %.2e", len(pairs), b.name, res)
    return QuasiBasis(pairs=pairs, index=index, residual=res)


def index_report(b: GradedCStarBundle) -> Report:
    report = Report()
    qb = quasi_basis_and_index(b)
    report.check("quasi_basis.identity", ANCHOR_INDEX, qb.residual, CHECK_TOL)
    order = b.group.order
    res = fro(qb.index - order * b.total_algebra.unit)
    message = f"watatani_index: {order}" if res <= CHECK_TOL else f"index is not {order}·1 (residual {res:.3e})"
    report.check("watatani_index", ANCHOR_INDEX, res, CHECK_TOL, message=message)
    return report


def saturation_report(b: GradedCStarBundle) -> Report:
    report = Report()
    for t, res in saturation_residuals(b).items():
        report.check(f"saturated[{t}]", ANCHOR_SATURATION, res, b.tol)
    return report
