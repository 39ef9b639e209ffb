"""
Complex matrices in scenario files: row-major nested arrays whose entries
are either plain numbers or [re, im] pairs.
"""
from __future__ import annotations

import math
from typing import List, Sequence, Union

import numpy as np

from fellmorita.algebra.matspace import CMatrix
from fellmorita.errors import ParseError

Scalar = Union[float, int, List[float]]
MatrixData = List[List[Scalar]]

# entries below this magnitude are written as 0
ZERO_CUTOFF = 1e-15


def _finite(z: complex, v: object) -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParseError(f"matrix entry must be finite, got {v!r}")
    return z


def parse_scalar(v: object) -> complex:
    if isinstance(v, bool):
        raise ParseError(f"boolean is not a matrix entry: {v!r}")
    if isinstance(v, (int, float)):
        return _finite(complex(v), v)
    if isinstance(v, Sequence) and not isinstance(v, str) and len(v) == 2:
        re, im = v
        if all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in (re, im)):
            return _finite(complex(re, im), v)
    raise ParseError(f"expected a number or [re, im], got {v!r}")


def parse_matrix(data: object) -> CMatrix:
    if not isinstance(data, Sequence) or isinstance(data, str) or not data:
        raise ParseError("matrix must be a non-empty list of rows")
    rows = []
    for row in data:
        if not isinstance(row, Sequence) or isinstance(row, str):
            raise ParseError(f"matrix row must be a list, got {row!r}")
        rows.append([parse_scalar(v) for v in row])
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise ParseError("matrix rows have unequal or zero length")
    return np.array(rows, dtype=np.complex128)


def _clean(x: float) -> float:
    return 0.0 if abs(x) < ZERO_CUTOFF else float(x)


def encode_scalar(z: complex) -> Scalar:
    re, im = _clean(z.real), _clean(z.imag)
    return re if im == 0.0 else [re, im]


def encode_matrix(m: np.ndarray) -> MatrixData:
    arr = np.asarray(m, dtype=np.complex128)
    return [[encode_scalar(complex(v)) for v in row] for row in arr]


def parse_coordinate_map(data: object, k: int) -> CMatrix:
    """A complex-linear map on k coordinates, given as k×k or as its 2k×2k realified form [[Re, -Im], [Im, Re]]."""
    m = parse_matrix(data)
    if m.shape == (k, k):
        return m
    if m.shape != (2 * k, 2 * k):
        raise ParseError(f"coordinate map must be {k}x{k} or {2 * k}x{2 * k}, got {m.shape[0]}x{m.shape[1]}")
    if np.any(m.imag != 0):
        raise ParseError("realified coordinate map must be real")
    r = m.real
    re, im = r[:k, :k], r[k:, :k]
    if not (np.allclose(r[k:, k:], re) and np.allclose(r[:k, k:], -im)):
        raise ParseError("realified coordinate map is not complex-linear")
    return re + 1j * im
