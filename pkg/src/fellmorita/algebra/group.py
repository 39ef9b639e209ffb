from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fellmorita.errors import NotAGroup

logger = logging.getLogger(__name__)

Permutation = Tuple[int, ...]


@dataclass(frozen=True)
class FiniteGroup:
    """
    A finite group given by its Cayley table on dense indices 0..order-1.

    table[s][t] is the index of s·t. Build instances with `load_group`,
    which validates the group axioms.
    """

    table: Tuple[Tuple[int, ...], ...]
    identity: int
    inverse: Tuple[int, ...]
    name: str = "G"

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, s: int, t: int) -> int:
        return self.table[s][t]

    def inv(self, t: int) -> int:
        return self.inverse[t]

    def element_order(self, t: int) -> int:
        k, cur = 1, t
        while cur != self.identity:
            cur = self.table[cur][t]
            k += 1
        return k

    @cached_property
    def orders(self) -> Tuple[int, ...]:
        return tuple(self.element_order(t) for t in self.elements)

    def is_automorphism(self, f: Sequence[int]) -> bool:
        if sorted(f) != list(self.elements):
            return False
        return all(
            f[self.table[s][t]] == self.table[f[s]][f[t]]
            for s in self.elements
            for t in self.elements
        )

    def __repr__(self) -> str:
        return f"{self.name}(order={self.order})"


def load_group(table: Sequence[Sequence[int]], name: str = "G") -> FiniteGroup:
    """Validate a Cayley table and compute identity and inverses."""
    try:
        bad = [v for row in table for v in row if isinstance(v, bool) or not isinstance(v, (int, np.integer))]
        if bad:
            raise NotAGroup(f"Cayley table entries must be integers, got {bad[0]!r}")
        arr = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as e:
        raise NotAGroup(f"Cayley table is not an integer array: {e}") from e

    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise NotAGroup(f"Cayley table must be a non-empty square array, got shape {arr.shape}")

    n = arr.shape[0]
    expected = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(arr[i, :]), expected):
            raise NotAGroup(f"row {i} is not a permutation of 0..{n - 1}")
        if not np.array_equal(np.sort(arr[:, i]), expected):
            raise NotAGroup(f"column {i} is not a permutation of 0..{n - 1}")

    identity: Optional[int] = None
    for e in range(n):
        if np.array_equal(arr[e, :], expected) and np.array_equal(arr[:, e], expected):
            identity = e
            break
    if identity is None:
        raise NotAGroup("no identity element")

    inverse: List[int] = []
    for t in range(n):
        cands = [s for s in range(n) if arr[t, s] == identity and arr[s, t] == identity]
        if not cands:
            raise NotAGroup(f"element {t} has no inverse")
        inverse.append(cands[0])

    # (st)u == s(tu) for all triples, vectorised over u
    for s in range(n):
        for t in range(n):
            if not np.array_equal(arr[arr[s, t], :], arr[s, arr[t, :]]):
                raise NotAGroup(f"associativity fails for s={s}, t={t}")

    return FiniteGroup(
        table=tuple(tuple(int(v) for v in row) for row in arr),
        identity=int(identity),
        inverse=tuple(inverse),
        name=name,
    )


# ---------------------------------------------------------------------
# automorphisms
# ---------------------------------------------------------------------
def _propagate(g: FiniteGroup, f: Dict[int, int]) -> bool:
    """Close a partial assignment under f(st) = f(s)f(t); False on conflict."""
    changed = True
    while changed:
        changed = False
        for s, fs in list(f.items()):
            for t, ft in list(f.items()):
                st, target = g.table[s][t], g.table[fs][ft]
                cur = f.get(st)
                if cur is None:
                    if target in f.values() or g.orders[target] != g.orders[st]:
                        return False
                    f[st] = target
                    changed = True
                elif cur != target:
                    return False
    return True


def automorphisms(g: FiniteGroup) -> List[Permutation]:
    """
    All automorphisms of g, sorted lexicographically.

    Backtracking search: each element may only map to an element of the
    same order, and every partial assignment is closed under products
    before branching again.
    """
    found: List[Permutation] = []

    def extend(f: Dict[int, int]) -> None:
        free = [t for t in g.elements if t not in f]
        if not free:
            found.append(tuple(f[t] for t in g.elements))
            return
        t = free[0]
        used = set(f.values())
        for image in g.elements:
            if image in used or g.orders[image] != g.orders[t]:
                continue
            trial = dict(f)
            trial[t] = image
            if _propagate(g, trial):
                extend(trial)

    extend({g.identity: g.identity})
    found = sorted(set(found))
    logger.debug("%r has %d automorphisms", g, len(found))
    return found


def compose(f: Sequence[int], h: Sequence[int]) -> Permutation:
    """(f∘h)(t) = f(h(t))."""
    return tuple(f[h[t]] for t in range(len(h)))


def invert_permutation(f: Sequence[int]) -> Permutation:
    out = [0] * len(f)
    for t, ft in enumerate(f):
        out[ft] = t
    return tuple(out)


# ---------------------------------------------------------------------
# standard groups
# ---------------------------------------------------------------------
def cyclic_group(n: int) -> FiniteGroup:
    return load_group([[(i + j) % n for j in range(n)] for i in range(n)], name=f"Z{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Elements (a, b) are indexed a·|h| + b."""
    m = h.order
    pairs = list(itertools.product(g.elements, h.elements))
    table = [
        [g.mul(a, c) * m + h.mul(b, d) for (c, d) in pairs]
        for (a, b) in pairs
    ]
    return load_group(table, name=f"{g.name}x{h.name}")


def symmetric_group(n: int) -> FiniteGroup:
    """Permutations of n points in lexicographic order; product is composition."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[compose(p, q)] for q in perms] for p in perms]
    return load_group(table, name=f"S{n}")
