"""
Subspaces of rows×cols complex matrices.

Every fiber, algebra and bimodule in the toolkit is a `MatSubspace`: an
orthonormal basis under the Frobenius inner product <M, N> = trace(M* N),
plus the tolerance used for rank and membership decisions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from fellmorita.errors import ShapeMismatch

logger = logging.getLogger(__name__)

CMatrix = npt.NDArray[np.complex128]

DEFAULT_TOL = 1e-9


def as_cmatrix(m: object) -> CMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(m: CMatrix) -> CMatrix:
    return np.conj(m).T


def fro(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def rel_residual(diff: np.ndarray, ref: np.ndarray) -> float:
    """‖diff‖_F relative to max(‖ref‖_F, 1)."""
    return fro(diff) / max(fro(ref), 1.0)


# ---------------------------------------------------------------------
# orthonormalization
# ---------------------------------------------------------------------
def _orthonormalize(vectors: np.ndarray, tol: float) -> np.ndarray:
    """
    Gram–Schmidt with one reorthogonalization pass, in input order.

    A vector is discarded when its residual norm is <= tol·max(largest input norm, 1).
    """
    k, n = vectors.shape
    if k == 0 or n == 0:
        return np.zeros((0, n), dtype=np.complex128)

    threshold = tol * max(float(np.linalg.norm(vectors, axis=1).max()), 1.0)
    q = np.zeros((min(k, n), n), dtype=np.complex128)
    r = 0
    for v in vectors:
        w = np.array(v, dtype=np.complex128)
        for _ in range(2):
            if r:
                w -= q[:r].T @ (q[:r].conj() @ w)
        nrm = float(np.linalg.norm(w))
        if nrm > threshold:
            q[r] = w / nrm
            r += 1
            if r == n:
                break
    if r < k:
        logger.debug("span discarded %d of %d vectors (threshold %.2e)", k - r, k, threshold)
    return q[:r]


# ---------------------------------------------------------------------
# MatSubspace
# ---------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MatSubspace:
    rows: int
    cols: int
    basis: np.ndarray  # (dim, rows, cols), Frobenius-orthonormal
    tol: float = DEFAULT_TOL

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @cached_property
    def flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, self.rows * self.cols)

    def __len__(self) -> int:
        return self.dim

    def __iter__(self) -> Iterator[CMatrix]:
        return iter(self.basis)

    def __getitem__(self, i: int) -> CMatrix:
        return self.basis[i]

    def __contains__(self, m: object) -> bool:
        return contains(self, as_cmatrix(m))

    def __repr__(self) -> str:
        return f"<MatSubspace dim={self.dim} in {self.rows}x{self.cols}>"

    def _check_shape(self, m: np.ndarray) -> None:
        if m.shape != self.shape:
            raise ShapeMismatch(f"matrix of shape {m.shape} vs subspace ambient {self.shape}")

    def coordinates(self, m: CMatrix) -> np.ndarray:
        """Coefficients of the orthogonal projection of m in the orthonormal basis."""
        m = as_cmatrix(m)
        self._check_shape(m)
        return self.flat.conj() @ m.reshape(-1)

    def element(self, coords: np.ndarray) -> CMatrix:
        if self.dim == 0:
            return np.zeros(self.shape, dtype=np.complex128)
        return (np.asarray(coords, dtype=np.complex128) @ self.flat).reshape(self.shape)

    def project(self, m: CMatrix) -> CMatrix:
        return self.element(self.coordinates(m))

    def distance(self, m: CMatrix) -> float:
        """‖m − proj(m)‖_F relative to max(‖m‖_F, 1)."""
        m = as_cmatrix(m)
        return rel_residual(m - self.project(m), m)


def zero_space(rows: int, cols: int, tol: float = DEFAULT_TOL) -> MatSubspace:
    return MatSubspace(rows, cols, np.zeros((0, rows, cols), dtype=np.complex128), tol)


def full_space(rows: int, cols: int, tol: float = DEFAULT_TOL) -> MatSubspace:
    units = []
    for i in range(rows):
        for j in range(cols):
            e = np.zeros((rows, cols), dtype=np.complex128)
            e[i, j] = 1.0
            units.append(e)
    return span(units, tol, shape=(rows, cols))


def span(
    mats: Iterable[object],
    tol: float = DEFAULT_TOL,
    *,
    shape: Optional[Tuple[int, int]] = None,
) -> MatSubspace:
    """Orthonormal basis of the linear span of `mats`."""
    arrs = [as_cmatrix(m) for m in mats]
    if not arrs:
        rows, cols = shape if shape is not None else (0, 0)
        return zero_space(rows, cols, tol)

    ref = shape if shape is not None else arrs[0].shape
    for i, a in enumerate(arrs):
        if a.shape != tuple(ref):
            raise ShapeMismatch(f"input {i} has shape {a.shape}, expected {tuple(ref)}")

    rows, cols = ref
    stacked = np.stack(arrs).reshape(len(arrs), rows * cols)
    q = _orthonormalize(stacked, tol)
    return MatSubspace(rows, cols, q.reshape(q.shape[0], rows, cols), tol)


def contains(s: MatSubspace, m: CMatrix) -> bool:
    return s.distance(m) <= s.tol


def subspace_residual(big: MatSubspace, small: MatSubspace) -> float:
    """Largest relative distance of a basis vector of `small` from `big` (0 when small is {0})."""
    if big.shape != small.shape:
        raise ShapeMismatch(f"ambient {small.shape} vs {big.shape}")
    if small.dim == 0:
        return 0.0
    coords = big.flat.conj() @ small.flat.T
    diff = small.flat.T - big.flat.T @ coords if big.dim else small.flat.T
    return float(np.linalg.norm(diff, axis=0).max())


def is_subspace(small: MatSubspace, big: MatSubspace) -> bool:
    return subspace_residual(big, small) <= max(big.tol, small.tol)


def equals(s: MatSubspace, t: MatSubspace) -> bool:
    if s.shape != t.shape:
        raise ShapeMismatch(f"ambient {s.shape} vs {t.shape}")
    return s.dim == t.dim and is_subspace(t, s) and is_subspace(s, t)


def equality_residual(s: MatSubspace, t: MatSubspace) -> float:
    """Symmetric containment residual; inf-free, 1.0 when the dimensions disagree."""
    if s.dim != t.dim:
        return 1.0
    return max(subspace_residual(s, t), subspace_residual(t, s))


def product_span(s: MatSubspace, t: MatSubspace) -> MatSubspace:
    if s.cols != t.rows:
        raise ShapeMismatch(f"cannot multiply {s.shape} by {t.shape}")
    tol = max(s.tol, t.tol)
    shape = (s.rows, t.cols)
    if s.dim == 0 or t.dim == 0:
        return zero_space(*shape, tol)
    prods = np.einsum("aij,bjk->abik", s.basis, t.basis).reshape(-1, *shape)
    return span(prods, tol, shape=shape)


def adjoint_span(s: MatSubspace) -> MatSubspace:
    if s.dim == 0:
        return zero_space(s.cols, s.rows, s.tol)
    return span(np.conj(np.transpose(s.basis, (0, 2, 1))), s.tol, shape=(s.cols, s.rows))


def sum_spaces(*spaces: MatSubspace, shape: Optional[Tuple[int, int]] = None) -> MatSubspace:
    """Span of the union of the given subspaces."""
    if not spaces:
        return zero_space(*(shape or (0, 0)))
    ref = spaces[0].shape
    mats: List[np.ndarray] = []
    for s in spaces:
        if s.shape != ref:
            raise ShapeMismatch(f"ambient {s.shape} vs {ref}")
        mats.extend(s.basis)
    return span(mats, max(s.tol for s in spaces), shape=ref)


# ---------------------------------------------------------------------
# maps between subspaces
# ---------------------------------------------------------------------
def _realify(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c.real, c.imag], axis=0)


def _complexify(r: np.ndarray) -> np.ndarray:
    k = r.shape[0] // 2
    return r[:k] + 1j * r[k:]


def _solve_extension(p: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, float]:
    """Least-squares L with L @ p ≈ q; returns (L, relative residual)."""
    if p.shape[1] == 0 or q.shape[0] == 0:
        return np.zeros((q.shape[0], p.shape[0]), dtype=q.dtype), 0.0
    if p.shape[0] == 0:
        return np.zeros((q.shape[0], 0), dtype=q.dtype), rel_residual(q, q)
    sol, *_ = np.linalg.lstsq(p.T, q.T, rcond=None)
    lmat = sol.T
    return lmat, rel_residual(lmat @ p - q, q)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """
    A complex-linear map between two subspaces, stored as the matrix of
    coefficients in their orthonormal bases (codomain.dim × domain.dim).

    `residual` certifies how well the stored matrix reproduces the data it
    was built from (images outside the codomain, inconsistent extension).
    """

    domain: MatSubspace
    codomain: MatSubspace
    matrix: np.ndarray
    residual: float = 0.0

    @classmethod
    def from_function(
        cls, domain: MatSubspace, codomain: MatSubspace, fn: Callable[[CMatrix], CMatrix]
    ) -> "LinearMap":
        images = [as_cmatrix(fn(q)) for q in domain.basis]
        mat = np.zeros((codomain.dim, domain.dim), dtype=np.complex128)
        res = 0.0
        for j, y in enumerate(images):
            mat[:, j] = codomain.coordinates(y)
            res = max(res, codomain.distance(y))
        return cls(domain, codomain, mat, res)

    @classmethod
    def from_pairs(
        cls,
        domain: MatSubspace,
        codomain: MatSubspace,
        sources: Sequence[CMatrix],
        images: Sequence[CMatrix],
    ) -> "LinearMap":
        """Linear extension of sources[k] ↦ images[k]; residual measures well-definedness."""
        if len(sources) != len(images):
            raise ValueError("sources and images differ in length")
        p = np.array([domain.coordinates(s) for s in sources], dtype=np.complex128).T.reshape(domain.dim, len(sources))
        q = np.array([codomain.coordinates(y) for y in images], dtype=np.complex128).T.reshape(codomain.dim, len(images))
        lmat, res = _solve_extension(p, q)
        outside = max([domain.distance(s) for s in sources] + [codomain.distance(y) for y in images] + [0.0])
        return cls(domain, codomain, lmat, max(res, outside))

    @classmethod
    def identity(cls, space: MatSubspace) -> "LinearMap":
        return cls(space, space, np.eye(space.dim, dtype=np.complex128))

    def __call__(self, m: CMatrix) -> CMatrix:
        return self.codomain.element(self.matrix @ self.domain.coordinates(m))

    def compose(self, inner: "LinearMap") -> "LinearMap":
        """self ∘ inner."""
        return LinearMap.from_function(inner.domain, self.codomain, lambda m: self(inner(m)))

    def scaled(self, c: complex) -> "LinearMap":
        return LinearMap(self.domain, self.codomain, c * self.matrix, self.residual)

    def rank(self, tol: float = 1e-8) -> int:
        if self.matrix.size == 0:
            return 0
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(sv > tol * max(float(sv.max()), 1.0)))

    def is_bijective(self, tol: float = 1e-8) -> bool:
        return self.domain.dim == self.codomain.dim and self.rank(tol) == self.domain.dim

    def inverse(self) -> "LinearMap":
        return LinearMap(self.codomain, self.domain, np.linalg.inv(self.matrix), self.residual)

    def deviation(self, other: "LinearMap") -> float:
        """Largest relative difference of the two maps on this map's domain basis."""
        out = 0.0
        for q in self.domain.basis:
            a, b = self(q), other(q)
            out = max(out, rel_residual(a - b, a))
        return out


@dataclass(frozen=True, eq=False)
class AntilinearMap:
    """
    A conjugate-linear map between subspaces, stored as a real-linear matrix
    over realified coordinates [Re c; Im c] (size 2·codomain.dim × 2·domain.dim).
    """

    domain: MatSubspace
    codomain: MatSubspace
    matrix: np.ndarray
    residual: float = 0.0

    @classmethod
    def from_function(
        cls, domain: MatSubspace, codomain: MatSubspace, fn: Callable[[CMatrix], CMatrix]
    ) -> "AntilinearMap":
        k = domain.dim
        mat = np.zeros((2 * codomain.dim, 2 * k), dtype=np.float64)
        res = 0.0
        for j, q in enumerate(domain.basis):
            for col, src in ((j, q), (k + j, 1j * q)):
                y = as_cmatrix(fn(src))
                mat[:, col] = _realify(codomain.coordinates(y))
                res = max(res, codomain.distance(y))
        return cls(domain, codomain, mat, res)

    @classmethod
    def from_pairs(
        cls,
        domain: MatSubspace,
        codomain: MatSubspace,
        sources: Sequence[CMatrix],
        images: Sequence[CMatrix],
    ) -> "AntilinearMap":
        """Conjugate-linear extension of sources[k] ↦ images[k]."""
        cols_p, cols_q = [], []
        for s, y in zip(sources, images, strict=True):
            cs, cy = domain.coordinates(s), codomain.coordinates(y)
            cols_p += [_realify(cs), _realify(1j * cs)]
            cols_q += [_realify(cy), _realify(-1j * cy)]
        p = np.array(cols_p, dtype=np.float64).T.reshape(2 * domain.dim, len(cols_p))
        q = np.array(cols_q, dtype=np.float64).T.reshape(2 * codomain.dim, len(cols_q))
        lmat, res = _solve_extension(p, q)
        outside = max([domain.distance(s) for s in sources] + [codomain.distance(y) for y in images] + [0.0])
        return cls(domain, codomain, lmat, max(res, outside))

    def __call__(self, m: CMatrix) -> CMatrix:
        r = self.matrix @ _realify(self.domain.coordinates(m))
        return self.codomain.element(_complexify(r))

    def conjugate_linearity_defect(self) -> float:
        """‖M·J + J·M‖ where J is multiplication by i on realified coordinates; 0 iff conjugate-linear."""
        def j_mat(k: int) -> np.ndarray:
            eye = np.eye(k)
            return np.block([[np.zeros((k, k)), -eye], [eye, np.zeros((k, k))]])

        m = self.matrix
        if m.size == 0:
            return 0.0
        return fro(m @ j_mat(self.domain.dim) + j_mat(self.codomain.dim) @ m) / max(fro(m), 1.0)

    def scaled(self, c: float) -> "AntilinearMap":
        return AntilinearMap(self.domain, self.codomain, c * self.matrix, self.residual)

    def deviation(self, other: "AntilinearMap") -> float:
        out = 0.0
        for q in self.domain.basis:
            for src in (q, 1j * q):
                a, b = self(src), other(src)
                out = max(out, rel_residual(a - b, a))
        return out
