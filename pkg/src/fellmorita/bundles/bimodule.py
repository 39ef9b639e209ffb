"""
Concrete Hilbert bimodules: a subspace X of n×m matrices between algebras
A ⊆ M_n and B ⊆ M_m, with inner products x·y* (A-valued) and x*·y (B-valued).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Union

from fellmorita.algebra.matspace import (
    CMatrix,
    MatSubspace,
    adjoint_span,
    dagger,
    equality_residual,
    equals,
    product_span,
    rel_residual,
    span,
    subspace_residual,
)
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra, inv_sqrt
from fellmorita.bundles.bundle import GradedCStarBundle
from fellmorita.errors import MiddleAlgebraMismatch, ShapeMismatch
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

ANCHOR_BIMODULE = "hilbert-bimodule"
ANCHOR_MORITA = "inclusion-morita"

CHECK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConcreteBimodule:
    left: ConcreteStarAlgebra
    right: ConcreteStarAlgebra
    space: MatSubspace

    @property
    def shape(self) -> tuple[int, int]:
        return self.space.shape

    def __repr__(self) -> str:
        return f"<ConcreteBimodule dim={self.space.dim} in {self.space.rows}x{self.space.cols}>"


@dataclass(frozen=True, eq=False)
class InclusionMoritaDatum:
    """A C–D equivalence bimodule Y with a subspace X that should be an A–B one."""

    big: ConcreteBimodule
    small_space: MatSubspace
    small_left: ConcreteStarAlgebra
    small_right: ConcreteStarAlgebra


def make_bimodule(
    left: ConcreteStarAlgebra,
    right: ConcreteStarAlgebra,
    space: Union[MatSubspace, Sequence[object]],
) -> ConcreteBimodule:
    if not isinstance(space, MatSubspace):
        space = span(space, max(left.tol, right.tol), shape=(left.n, right.n))
    if space.shape != (left.n, right.n):
        raise ShapeMismatch(f"bimodule of shape {space.shape} between M_{left.n} and M_{right.n}")
    return ConcreteBimodule(left=left, right=right, space=space)


def left_inner_span(x: ConcreteBimodule) -> MatSubspace:
    return product_span(x.space, adjoint_span(x.space))


def right_inner_span(x: ConcreteBimodule) -> MatSubspace:
    return product_span(adjoint_span(x.space), x.space)


def is_left_full(x: ConcreteBimodule) -> bool:
    return equals(left_inner_span(x), x.left.space)


def is_right_full(x: ConcreteBimodule) -> bool:
    return equals(right_inner_span(x), x.right.space)


def verify_bimodule(x: ConcreteBimodule, require_full: bool = False) -> Report:
    report = Report()
    tol = max(x.left.tol, x.right.tol, x.space.tol)
    if x.space.shape != (x.left.n, x.right.n):
        report.add("shape", ANCHOR_BIMODULE, False, message=f"{x.space.shape} vs ({x.left.n}, {x.right.n})")
        return report

    res = subspace_residual(x.space, product_span(x.left.space, x.space))
    report.check("left_action", ANCHOR_BIMODULE, res, tol, message="" if res <= tol else "LeftActionViolation")
    res = subspace_residual(x.space, product_span(x.space, x.right.space))
    report.check("right_action", ANCHOR_BIMODULE, res, tol, message="" if res <= tol else "RightActionViolation")

    res = subspace_residual(x.left.space, left_inner_span(x))
    report.check("left_inner_product", ANCHOR_BIMODULE, res, tol)
    res = subspace_residual(x.right.space, right_inner_span(x))
    report.check("right_inner_product", ANCHOR_BIMODULE, res, tol)

    unit_res = 0.0
    for q in x.space.basis:
        unit_res = max(unit_res, rel_residual(x.left.unit @ q - q, q), rel_residual(q @ x.right.unit - q, q))
    report.check("units", ANCHOR_BIMODULE, unit_res, CHECK_TOL)

    if require_full:
        res = equality_residual(left_inner_span(x), x.left.space)
        report.check("left_full", ANCHOR_BIMODULE, res, tol, message="" if res <= tol else "span X·X* != A")
        res = equality_residual(right_inner_span(x), x.right.space)
        report.check("right_full", ANCHOR_BIMODULE, res, tol, message="" if res <= tol else "span X*·X != B")
    return report


def dual(x: ConcreteBimodule) -> ConcreteBimodule:
    """The conjugate bimodule, realized as X* between B and A."""
    return ConcreteBimodule(left=x.right, right=x.left, space=adjoint_span(x.space))


def tensor(x: ConcreteBimodule, y: ConcreteBimodule) -> ConcreteBimodule:
    """Interior tensor product over the middle algebra, realized as span(X·Y)."""
    if x.right.n != y.left.n or not equals(x.right.space, y.left.space):
        raise MiddleAlgebraMismatch("right algebra of the first factor differs from left algebra of the second")
    return ConcreteBimodule(left=x.left, right=y.right, space=product_span(x.space, y.space))


# ---------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------
def left_frame(x: ConcreteBimodule) -> List[CMatrix]:
    """{z_i} ⊆ X with Σ z_i z_i* = unit of A (needs X left-full)."""
    s = sum((q @ dagger(q) for q in x.space.basis), start=0 * x.left.unit)
    p = inv_sqrt(s, unit=x.left.unit, tol=x.space.tol)
    return [p @ q for q in x.space.basis]


def right_frame(x: ConcreteBimodule) -> List[CMatrix]:
    """{w_j} ⊆ X with Σ w_j* w_j = unit of B (needs X right-full)."""
    s = sum((dagger(q) @ q for q in x.space.basis), start=0 * x.right.unit)
    p = inv_sqrt(s, unit=x.right.unit, tol=x.space.tol)
    return [q @ p for q in x.space.basis]


# ---------------------------------------------------------------------
# inclusions
# ---------------------------------------------------------------------
def check_inclusion_morita(d: InclusionMoritaDatum) -> Report:
    report = Report()
    y = d.big
    tol = max(y.space.tol, d.small_space.tol)

    report.extend(verify_bimodule(y, require_full=True), prefix="big")
    small = ConcreteBimodule(left=d.small_left, right=d.small_right, space=d.small_space)
    report.extend(verify_bimodule(small, require_full=True), prefix="small")

    if d.small_space.shape != y.space.shape:
        report.add("small_in_big", ANCHOR_MORITA, False, message=f"{d.small_space.shape} vs {y.space.shape}")
        return report
    report.check("small_in_big", ANCHOR_MORITA, subspace_residual(y.space, d.small_space), tol)
    report.check(
        "small_algebras_in_big",
        ANCHOR_MORITA,
        max(subspace_residual(y.left.space, d.small_left.space), subspace_residual(y.right.space, d.small_right.space)),
        tol,
    )

    res = equality_residual(product_span(y.space, adjoint_span(d.small_space)), y.left.space)
    report.check("span_Y_Xstar", ANCHOR_MORITA, res, tol, message="" if res <= tol else "span Y·X* != C")
    res = equality_residual(product_span(adjoint_span(y.space), d.small_space), y.right.space)
    report.check("span_Ystar_X", ANCHOR_MORITA, res, tol, message="" if res <= tol else "span Y*·X != D")
    return report


def identity_datum(b: GradedCStarBundle) -> InclusionMoritaDatum:
    """Y = C as a C–C bimodule with X = A_e."""
    c = b.total_algebra
    a = b.fiber_algebra
    return InclusionMoritaDatum(
        big=ConcreteBimodule(left=c, right=c, space=c.space),
        small_space=a.space,
        small_left=a,
        small_right=a,
    )
