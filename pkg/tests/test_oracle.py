"""
Numerical spans against exact Gaussian elimination.

Instances use Gaussian-integer entries so the reference rank can be
computed with exact fractions over the realified coordinates (Re, Im).
"""
from fractions import Fraction

import numpy as np
import pytest

from fellmorita.algebra.matspace import contains, product_span, span

INSTANCES = 1000
ENTRIES = np.array([0, 0, 0, 1, -1, 1j, -1j, 1 + 1j], dtype=np.complex128)


def _realify(m):
    flat = np.asarray(m).ravel()
    return [Fraction(int(round(v.real))) for v in flat] + [Fraction(int(round(v.imag))) for v in flat]


def _exact_rank(vectors):
    rows = [list(v) for v in vectors]
    if not rows:
        return 0
    rank = 0
    for col in range(len(rows[0])):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank]
        for r in range(rank + 1, len(rows)):
            factor = rows[r][col] / head[col]
            if factor:
                rows[r] = [a - factor * b for a, b in zip(rows[r], head)]
        rank += 1
    return rank


def _complex_dim(mats):
    # the real span of {M, iM} has twice the complex dimension
    vectors = []
    for m in mats:
        vectors.append(_realify(m))
        vectors.append(_realify(1j * m))
    rank = _exact_rank(vectors)
    assert rank % 2 == 0
    return rank // 2


def _random_family(rng, shape, max_count):
    count = int(rng.integers(1, max_count + 1))
    mats = [rng.choice(ENTRIES, size=shape) for _ in range(count)]
    # planted dependencies
    while len(mats) < max_count and rng.random() < 0.4:
        a, b = rng.integers(0, len(mats), size=2)
        mats.append(mats[a] + 1j * mats[b])
    return mats


def _shape(rng):
    return int(rng.integers(1, 5)), int(rng.integers(1, 5))


@pytest.mark.parametrize("chunk", range(10))
def test_span_dimension_and_membership(chunk):
    rng = np.random.default_rng(20240601 + chunk)
    for _ in range(INSTANCES // 10):
        shape = _shape(rng)
        mats = _random_family(rng, shape, 8)
        s = span(mats)
        expected = _complex_dim(mats)
        assert s.dim == expected

        inside = mats[0] + 1j * mats[-1]
        assert contains(s, inside)
        probe = rng.choice(ENTRIES, size=shape)
        assert contains(s, probe) == (_complex_dim(mats + [probe]) == expected)


@pytest.mark.parametrize("chunk", range(10))
def test_product_span_dimension(chunk):
    rng = np.random.default_rng(7 + chunk)
    for _ in range(INSTANCES // 10):
        rows, mid = _shape(rng)
        cols = int(rng.integers(1, 5))
        left = _random_family(rng, (rows, mid), 4)
        right = _random_family(rng, (mid, cols), 4)
        products = [x @ y for x in left for y in right]
        got = product_span(span(left), span(right))
        assert got.shape == (rows, cols)
        assert got.dim == _complex_dim(products)
