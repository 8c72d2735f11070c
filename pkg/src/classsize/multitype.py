"""Schools with several student types.

Type ``i`` has ``a_i`` students, each non-disruptive with probability ``p_i``.
An allocation is an ``s x m`` integer matrix whose column ``j`` lists how many
students of each type sit in class ``j``.  Columns are kept in canonical
order (by class size, then by composition) so allocations compare
structurally.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterator, Sequence

import networkx as nx
import numpy as np

from .errors import CapacityError, ImprovementNotGuaranteed, InvalidArgument
from .solver import gap_allows

DEFAULT_Z_CAP = 12
DEFAULT_S_CAP = 4


@dataclass(frozen=True)
class MultiTypeInstance:
    probs: tuple[float, ...]
    counts: tuple[int, ...]
    W: float
    V: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "counts", tuple(int(a) for a in self.counts))
        if not self.probs or len(self.probs) != len(self.counts):
            raise InvalidArgument("probs and counts must be non-empty and of equal length")
        if any(not 0 < p <= 1 for p in self.probs):
            raise InvalidArgument(f"probabilities must lie in (0, 1], got {self.probs}")
        if any(a < 1 for a in self.counts):
            raise InvalidArgument(f"type counts must be positive, got {self.counts}")
        if not self.W > 0 or not self.V > 0:
            raise InvalidArgument("W and V must be positive")

    @property
    def s(self) -> int:
        return len(self.probs)

    @property
    def Z(self) -> int:
        return sum(self.counts)


def _column_key(col: tuple[int, ...]):
    return (sum(col), col)


@dataclass(frozen=True)
class AllocationMatrix:
    """Allocation stored as a canonically ordered tuple of class columns."""

    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cols = tuple(tuple(int(x) for x in c) for c in self.columns)
        if not cols:
            raise InvalidArgument("an allocation needs at least one class")
        if len({len(c) for c in cols}) != 1:
            raise InvalidArgument("all columns need one entry per type")
        if any(x < 0 for c in cols for x in c):
            raise InvalidArgument("entries must be non-negative")
        if any(sum(c) == 0 for c in cols):
            raise InvalidArgument("empty classes are not allowed")
        object.__setattr__(self, "columns", tuple(sorted(cols, key=_column_key)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "AllocationMatrix":
        if len({len(r) for r in rows}) > 1:
            raise InvalidArgument("all rows need one entry per class")
        return cls(tuple(zip(*rows)))

    @property
    def s(self) -> int:
        return len(self.columns[0])

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(zip(*self.columns))

    @property
    def class_sizes(self) -> tuple[int, ...]:
        return tuple(sum(c) for c in self.columns)

    @property
    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.rows)

    def mixed_columns(self) -> list[int]:
        return [j for j, c in enumerate(self.columns) if sum(1 for x in c if x) >= 2]

    def key(self):
        return (self.m, len(self.mixed_columns()), self.columns)

    def graph(self, columns: Sequence[int] | None = None) -> nx.Graph:
        """Bipartite type/class graph with an edge wherever the entry is positive."""
        js = range(self.m) if columns is None else columns
        g = nx.Graph()
        g.add_nodes_from(("r", i) for i in range(self.s))
        for j in js:
            g.add_node(("c", j))
            for i, x in enumerate(self.columns[j]):
                if x:
                    g.add_edge(("r", i), ("c", j))
        return g


def _column_value(col: Sequence[int], probs: Sequence[float]) -> float:
    prod = 1.0
    for p, n in zip(probs, col):
        prod *= p**n
    return sum(col) * prod


def evaluate_multitype(inst: MultiTypeInstance, alloc: AllocationMatrix) -> float:
    if alloc.s != inst.s or alloc.row_sums != inst.counts:
        raise InvalidArgument(f"allocation row sums {alloc.row_sums} do not match {inst.counts}")
    out = sum(_column_value(c, inst.probs) for c in alloc.columns)
    return inst.V * out - alloc.m * inst.W


@lru_cache(maxsize=64)
def _allocation_table(counts: tuple[int, ...]):
    """Canonically sorted column vectors and every multiset of them summing to ``counts``."""
    vectors = [v for v in itertools.product(*(range(a + 1) for a in counts)) if any(v)]
    vectors.sort(key=_column_key)

    @lru_cache(maxsize=None)
    def rec(target: tuple[int, ...], start: int) -> tuple[tuple[int, ...], ...]:
        if not any(target):
            return ((),)
        out = []
        for idx in range(start, len(vectors)):
            v = vectors[idx]
            if all(x <= t for x, t in zip(v, target)):
                rest = tuple(t - x for t, x in zip(target, v))
                out.extend((idx,) + tail for tail in rec(rest, idx))
        return tuple(out)

    combos = rec(counts, 0)
    # pad with an index pointing at a zero value so rows can be summed column-wise
    pad = len(vectors)
    width = max(len(c) for c in combos)
    index = np.full((len(combos), width), pad, dtype=np.int32)
    for r, combo in enumerate(combos):
        index[r, : len(combo)] = combo
    m = np.array([len(c) for c in combos], dtype=np.float64)
    return vectors, combos, index, m


def enumerate_allocations(counts: Sequence[int]) -> Iterator[AllocationMatrix]:
    """Every feasible allocation, each produced once."""
    vectors, combos, _, _ = _allocation_table(tuple(int(a) for a in counts))
    for combo in combos:
        yield AllocationMatrix(tuple(vectors[i] for i in combo))


def solve_multitype_bruteforce(
    inst: MultiTypeInstance, z_cap: int = DEFAULT_Z_CAP, s_cap: int = DEFAULT_S_CAP
) -> tuple[AllocationMatrix, float]:
    """Global optimum over all allocations.

    Ties go to fewer classes, then fewer mixed classes, then the smallest
    canonical column tuple.
    """
    if inst.Z > z_cap or inst.s > s_cap:
        raise CapacityError(f"instance (Z={inst.Z}, s={inst.s}) exceeds caps (Z<={z_cap}, s<={s_cap})")
    vectors, combos, index, m = _allocation_table(inst.counts)
    values = np.array([_column_value(v, inst.probs) for v in vectors] + [0.0])
    # combos list columns in canonical order, so the left-to-right accumulation
    # matches evaluate_multitype exactly
    out = np.zeros(len(combos))
    for col in range(index.shape[1]):
        out = out + values[index[:, col]]
    profits = inst.V * out - m * inst.W
    top = profits.max()
    tied = [AllocationMatrix(tuple(vectors[i] for i in combos[r])) for r in np.flatnonzero(profits == top)]
    return min(tied, key=AllocationMatrix.key), float(top)


def find_cycle(alloc: AllocationMatrix) -> list[tuple[int, int]] | None:
    """Edges ``(row, column)`` of one cycle of the type/class graph, in cycle order."""
    try:
        edges = nx.find_cycle(alloc.graph())
    except nx.NetworkXNoCycle:
        return None
    out = []
    for u, v in edges:
        r, c = (u, v) if u[0] == "r" else (v, u)
        out.append((r[1], c[1]))
    return out


def _perturb(alloc: AllocationMatrix, cycle: list[tuple[int, int]], sign: int) -> AllocationMatrix:
    rows = [list(r) for r in alloc.rows]
    for pos, (i, j) in enumerate(cycle):
        rows[i][j] += sign if pos % 2 == 0 else -sign
    cols = [c for c in zip(*rows)]
    return AllocationMatrix(tuple(c for c in cols if any(c)))


def cycle_break_improve(inst: MultiTypeInstance, alloc: AllocationMatrix) -> AllocationMatrix | None:
    """Shift one student around a cycle of the type/class graph.

    Walking the cycle, entries alternately gain and lose a student, which keeps
    every row and column sum.  One of the two directions strictly raises the
    objective when each class on the cycle mixes two types of different
    probability.  Returns ``None`` when the graph is a forest.
    """
    cycle = find_cycle(alloc)
    if cycle is None:
        return None
    for (i1, j1), (i2, j2) in zip(cycle, cycle[1:] + cycle[:1]):
        if j1 == j2 and inst.probs[i1] == inst.probs[i2]:
            raise ImprovementNotGuaranteed(f"types {i1} and {i2} share probability {inst.probs[i1]}")
    base = evaluate_multitype(inst, alloc)
    plus = _perturb(alloc, cycle, +1)
    minus = _perturb(alloc, cycle, -1)
    v_plus, v_minus = evaluate_multitype(inst, plus), evaluate_multitype(inst, minus)
    best, value = (plus, v_plus) if v_plus >= v_minus else (minus, v_minus)
    if value <= base:
        raise ImprovementNotGuaranteed("neither perturbation improved the objective")
    return best


def break_all_cycles(inst: MultiTypeInstance, alloc: AllocationMatrix, max_steps: int = 10_000) -> AllocationMatrix:
    """Apply ``cycle_break_improve`` until the graph is a forest."""
    for _ in range(max_steps):
        nxt = cycle_break_improve(inst, alloc)
        if nxt is None:
            return alloc
        alloc = nxt
    raise RuntimeError("cycle breaking did not terminate")


@dataclass(frozen=True)
class StructureReport:
    is_forest: bool
    mixed: int
    trees: int
    s: int
    path_condition: bool | None

    @property
    def within_bound(self) -> bool:
        return self.mixed <= self.s - 1

    @property
    def passed(self) -> bool:
        return self.is_forest and self.within_bound and self.path_condition is not False


def verify_structure(alloc: AllocationMatrix, s: int | None = None) -> StructureReport:
    s = alloc.s if s is None else s
    is_forest = nx.is_forest(alloc.graph())
    mixed = alloc.mixed_columns()
    sub = alloc.graph(mixed)
    trees = nx.number_connected_components(sub)
    path = None
    if s >= 2 and len(mixed) == s - 1:
        degrees = [d for _, d in sub.degree()]
        path = (
            sub.number_of_edges() == 2 * (s - 1)
            and nx.is_connected(sub)
            and nx.is_forest(sub)
            and max(degrees) <= 2
        )
    return StructureReport(is_forest, len(mixed), trees, s, path)


@dataclass(frozen=True)
class SingletonReport:
    threshold: float
    applicable: bool
    singletons: int
    m: int
    Z: int
    profitable: bool

    @property
    def singleton_ok(self) -> bool | None:
        return self.singletons <= 1 if self.applicable else None

    @property
    def gap_ok(self) -> bool | None:
        if not self.applicable or not self.profitable:
            return None
        return gap_allows(self.Z, self.m)


def singleton_threshold(probs: Sequence[float]) -> float:
    """Largest ``p_i + p_j - 2 p_i p_j`` over pairs, ``i == j`` included."""
    return max(p + q - 2 * p * q for p in probs for q in probs)


def singleton_bound_check(inst: MultiTypeInstance, alloc: AllocationMatrix, profit: float | None = None) -> SingletonReport:
    if profit is None:
        profit = evaluate_multitype(inst, alloc)
    threshold = singleton_threshold(inst.probs)
    singletons = sum(1 for n in alloc.class_sizes if n == 1)
    return SingletonReport(threshold, inst.W >= threshold, singletons, alloc.m, inst.Z, profit > 0)


def segregated_spreads(alloc: AllocationMatrix) -> dict[int, int]:
    """Per type, max minus min size of the classes holding only that type."""
    out = {}
    for i in range(alloc.s):
        sizes = [c[i] for c in alloc.columns if c[i] and sum(c) == c[i]]
        if sizes:
            out[i] = max(sizes) - min(sizes)
    return out


def swap_gap(p: float, q: float, u: int, v: int) -> float:
    """``(p^(u-1) q^(v+1) + p^(u+1) q^(v-1))/2 - p^u q^v``, positive for ``p != q``."""
    return 0.5 * (p ** (u - 1) * q ** (v + 1) + p ** (u + 1) * q ** (v - 1)) - p**u * q**v
