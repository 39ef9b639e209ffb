import itertools

import pytest

from fellmorita.algebra.group import (
    automorphisms,
    compose,
    cyclic_group,
    direct_product,
    invert_permutation,
    load_group,
    symmetric_group,
)
from fellmorita.errors import NotAGroup


def test_trivial_group():
    g = load_group([[0]])
    assert g.order == 1
    assert g.identity == 0


def test_z2_from_table():
    g = load_group([[0, 1], [1, 0]])
    assert g.inverse == (0, 1)
    assert g.mul(1, 1) == 0


@pytest.mark.parametrize(
    "table",
    [
        [[0, 1], [1, 1]],            # second row not a permutation
        [[1, 0], [0, 1], [0, 1]],    # not square
        [[0, 1, 2], [1, 0, 2], [2, 2, 0]],
        [],
    ],
)
def test_bad_tables_rejected(table):
    with pytest.raises(NotAGroup):
        load_group(table)


def test_associativity_failure_detected():
    # a Latin square with identity 0 that is not a group (order 5 loop)
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(NotAGroup):
        load_group(table)


def test_identity_not_at_zero():
    # Z2 with the identity stored at index 1
    g = load_group([[1, 0], [0, 1]])
    assert g.identity == 1
    assert g.inverse == (0, 1)


def test_direct_product_indexing():
    v = direct_product(cyclic_group(2), cyclic_group(2))
    # (a, b) is 2a + b
    assert v.mul(1, 2) == 3
    assert v.mul(3, 3) == 0
    assert all(v.element_order(t) <= 2 for t in v.elements)


def _brute_force_count(g):
    count = 0
    for p in itertools.permutations(g.elements):
        if g.is_automorphism(p):
            count += 1
    return count


@pytest.mark.parametrize(
    "group, expected",
    [
        (cyclic_group(2), 1),
        (cyclic_group(3), 2),
        (cyclic_group(4), 2),
        (direct_product(cyclic_group(2), cyclic_group(2)), 6),
        (symmetric_group(3), 6),
    ],
)
def test_automorphism_counts(group, expected):
    autos = automorphisms(group)
    assert len(autos) == expected
    assert len(autos) == _brute_force_count(group)
    assert autos == sorted(autos)
    assert tuple(group.elements) in autos


def test_automorphisms_of_z4():
    assert automorphisms(cyclic_group(4)) == [(0, 1, 2, 3), (0, 3, 2, 1)]


def test_automorphisms_form_a_group():
    g = symmetric_group(3)
    autos = set(automorphisms(g))
    for f in autos:
        assert invert_permutation(f) in autos
        for h in autos:
            assert compose(f, h) in autos


@pytest.mark.parametrize("table", [[[0, 1], [1, 0.5]], [[0.0, 1], [1, 0]], [[True, False], [False, True]]])
def test_non_integer_entries_rejected(table):
    with pytest.raises(NotAGroup, match="integers"):
        load_group(table)
