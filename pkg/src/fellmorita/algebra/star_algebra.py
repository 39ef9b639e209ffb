from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.linalg

from fellmorita.algebra.matspace import (
    DEFAULT_TOL,
    CMatrix,
    MatSubspace,
    adjoint_span,
    as_cmatrix,
    dagger,
    fro,
    product_span,
    rel_residual,
    span,
    subspace_residual,
    zero_space,
)
from fellmorita.errors import NoUnit, NotASubalgebra, NotPositiveDefinite, ShapeMismatch

logger = logging.getLogger(__name__)

# invertibility threshold for inv_sqrt, relative to the largest eigenvalue
POSITIVITY_RATIO = 1e-8


@dataclass(frozen=True, eq=False)
class ConcreteStarAlgebra:
    """A *-closed subspace of n×n matrices together with its (solved) unit."""

    space: MatSubspace
    unit: CMatrix

    @property
    def n(self) -> int:
        return self.space.rows

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def tol(self) -> float:
        return self.space.tol

    def contains(self, m: CMatrix) -> bool:
        return self.space.distance(m) <= self.tol

    def __repr__(self) -> str:
        return f"<ConcreteStarAlgebra dim={self.dim} in M_{self.n}>"


# ---------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------
def solve_unit(space: MatSubspace) -> CMatrix:
    """
    The element u of `space` with u·x = x = x·u for every basis x.

    Solved as one stacked least-squares system in the space's coordinates.
    """
    n = space.rows
    if space.rows != space.cols:
        raise ShapeMismatch(f"algebra must be square, got {space.shape}")
    if space.dim == 0:
        return np.zeros((n, n), dtype=np.complex128)

    blocks, rhs = [], []
    for b in space.basis:
        left = np.stack([(q @ b).reshape(-1) for q in space.basis], axis=1)
        right = np.stack([(b @ q).reshape(-1) for q in space.basis], axis=1)
        blocks += [left, right]
        rhs += [b.reshape(-1), b.reshape(-1)]
    a = np.vstack(blocks)
    y = np.concatenate(rhs)
    coeffs, *_ = np.linalg.lstsq(a, y, rcond=None)
    res = rel_residual(a @ coeffs - y, y)
    if res > space.tol * 10:
        raise NoUnit(f"no unit element in a {space.dim}-dimensional space (residual {res:.2e})")

    u = space.element(coeffs)
    u = (u + dagger(u)) / 2
    if rel_residual(u @ u - u, u) > 1e-8:
        raise NoUnit("solved unit is not idempotent")
    return u


def as_algebra(space: MatSubspace) -> ConcreteStarAlgebra:
    """Wrap a space already known to be a *-algebra (no closure step)."""
    return ConcreteStarAlgebra(space=space, unit=solve_unit(space))


def closure_residuals(space: MatSubspace) -> Tuple[float, float]:
    """(product residual, adjoint residual); both ~0 iff the space is a *-algebra."""
    return (
        subspace_residual(space, product_span(space, space)),
        subspace_residual(space, adjoint_span(space)),
    )


def is_closed(space: MatSubspace) -> bool:
    prod, adj = closure_residuals(space)
    return prod <= space.tol and adj <= space.tol


def generate(gens: Iterable[object], tol: float = DEFAULT_TOL, *, n: Optional[int] = None) -> ConcreteStarAlgebra:
    """Smallest *-algebra containing `gens`, grown by products and adjoints to a fixpoint."""
    mats = [as_cmatrix(g) for g in gens]
    if not mats:
        size = n or 0
        return ConcreteStarAlgebra(zero_space(size, size, tol), np.zeros((size, size), dtype=np.complex128))
    size = mats[0].shape[0]
    for m in mats:
        if m.shape != (size, size):
            raise ShapeMismatch(f"generator of shape {m.shape}, expected {(size, size)}")

    s = span(mats + [dagger(m) for m in mats], tol, shape=(size, size))
    for rnd in range(size * size):
        prods = np.einsum("aij,bjk->abik", s.basis, s.basis).reshape(-1, size, size)
        adjs = np.conj(np.transpose(s.basis, (0, 2, 1)))
        grown = span(list(s.basis) + list(prods) + list(adjs), tol, shape=(size, size))
        logger.debug("closure round %d: dim %d -> %d", rnd, s.dim, grown.dim)
        if grown.dim == s.dim:
            break
        s = grown
    return as_algebra(s)


# ---------------------------------------------------------------------
# commutants and functional calculus
# ---------------------------------------------------------------------
def relative_commutant(a: ConcreteStarAlgebra, c: ConcreteStarAlgebra) -> MatSubspace:
    """{x ∈ C : xg = gx for every basis g of A}, as the kernel of the commutator map on C."""
    if a.n != c.n:
        raise NotASubalgebra(f"ambient M_{a.n} vs M_{c.n}")
    if subspace_residual(c.space, a.space) > max(a.tol, c.tol):
        raise NotASubalgebra("A is not contained in C")

    k = c.dim
    if k == 0 or a.dim == 0:
        return c.space
    cols = []
    for q in c.space.basis:
        cols.append(np.concatenate([(q @ g - g @ q).reshape(-1) for g in a.space.basis]))
    m = np.stack(cols, axis=1)
    _, sv, vh = np.linalg.svd(m, full_matrices=True)
    threshold = c.tol * max(float(sv.max()) if sv.size else 0.0, 1.0)
    rank = int(np.sum(sv > threshold))
    kernel = vh[rank:].conj()
    return span([c.space.element(v) for v in kernel], c.tol, shape=c.space.shape)


def _range_basis(unit: CMatrix) -> np.ndarray:
    w, v = np.linalg.eigh((unit + dagger(unit)) / 2)
    return v[:, w > 0.5]


def inv_sqrt(s: CMatrix, unit: Optional[CMatrix] = None, tol: float = DEFAULT_TOL) -> CMatrix:
    """
    Hermitian p with p·s·p = unit, computed on the range of `unit`
    (the ambient identity when no unit is given).
    """
    s = as_cmatrix(s)
    if s.shape[0] != s.shape[1]:
        raise ShapeMismatch(f"inv_sqrt needs a square matrix, got {s.shape}")
    if fro(s - dagger(s)) > tol * max(fro(s), 1.0):
        raise NotPositiveDefinite("matrix is not Hermitian")

    v = np.eye(s.shape[0], dtype=np.complex128) if unit is None else _range_basis(as_cmatrix(unit))
    if v.shape[1] == 0:
        return np.zeros_like(s)
    compressed = dagger(v) @ s @ v
    lam, u = np.linalg.eigh((compressed + dagger(compressed)) / 2)
    if lam.max() <= 0 or lam.min() <= POSITIVITY_RATIO * lam.max():
        raise NotPositiveDefinite(f"eigenvalues in [{lam.min():.3e}, {lam.max():.3e}]")
    root = (u * (1.0 / np.sqrt(lam))) @ dagger(u)
    return v @ root @ dagger(v)


def random_unitary(a: ConcreteStarAlgebra, rng: np.random.Generator) -> CMatrix:
    """exp(i·h) in A for a random Hermitian h ∈ A (unit of A in place of the identity)."""
    n = a.n
    h = np.zeros((n, n), dtype=np.complex128)
    for q in a.space.basis:
        h += rng.normal() * (q + dagger(q)) / 2 + rng.normal() * (q - dagger(q)) / 2j
    return scipy.linalg.expm(1j * h) - (np.eye(n) - a.unit)
