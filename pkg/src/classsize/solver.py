"""Exact solvers for the single-type class-size problem.

``solve_bruteforce`` enumerates every partition of ``Z`` and is the oracle.
``solve_balanced`` only looks at balanced vectors (sizes differing by at most
one), which is enough whenever the school is profitable.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .core import Instance, SolveResult, evaluate_output, evaluate_profit
from .errors import CapacityError, InvalidArgument

DEFAULT_CAP = 60


@dataclass(frozen=True)
class BalancedVector:
    """``k`` classes of sizes ``q`` and ``q + 1`` (``r`` of the latter) summing to ``Z``."""

    Z: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.Z:
            raise InvalidArgument(f"k must lie in 1..{self.Z}, got {self.k}")

    @property
    def q(self) -> int:
        return self.Z // self.k

    @property
    def r(self) -> int:
        return self.Z - self.k * self.q

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.q,) * (self.k - self.r) + (self.q + 1,) * self.r


def balanced(Z: int, k: int) -> tuple[int, ...]:
    return BalancedVector(Z, k).sizes


def half_count(Z: int) -> int:
    """``Z/2`` for even ``Z``, ``(Z+1)/2`` for odd ``Z``."""
    return (Z + 1) // 2


def gap_allows(Z: int, m: int) -> bool:
    """True when ``m`` is ``Z`` or at most ``half_count(Z)``."""
    return m == Z or m <= half_count(Z)


def _parts(n: int, m: int, lo: int) -> Iterator[tuple[int, ...]]:
    if m == 1:
        if n >= lo:
            yield (n,)
        return
    for first in range(lo, n // m + 1):
        for rest in _parts(n - first, m - 1, first):
            yield (first,) + rest


def partitions_with_parts(Z: int, m: int) -> Iterator[tuple[int, ...]]:
    """Partitions of ``Z`` into exactly ``m`` parts, non-decreasing, in lexicographic order."""
    if not 1 <= m <= Z:
        return iter(())
    return _parts(Z, m, 1)


def enumerate_partitions(Z: int) -> Iterator[tuple[int, ...]]:
    """Every partition of ``Z``, ordered by number of parts and then lexicographically."""
    if int(Z) != Z or Z < 1:
        raise InvalidArgument(f"Z must be a positive integer, got {Z}")
    for m in range(1, Z + 1):
        yield from _parts(Z, m, 1)


@lru_cache(maxsize=8)
def _partition_table(Z: int):
    rows = list(enumerate_partitions(Z))
    parts = np.zeros((len(rows), max(len(r) for r in rows)), dtype=np.int16)
    for i, row in enumerate(rows):
        parts[i, : len(row)] = row
    counts = np.array([len(r) for r in rows], dtype=np.float64)
    return rows, parts, counts


def _outputs(parts: np.ndarray, p: float) -> np.ndarray:
    Z = int(parts[:, 0].max())
    # term[0] is exactly 0.0, so padding adds nothing and the column-wise
    # accumulation reproduces evaluate_output's left-to-right sum bit for bit.
    terms = np.array([n * p**n for n in range(Z + 1)], dtype=np.float64)
    acc = np.zeros(parts.shape[0])
    for col in range(parts.shape[1]):
        acc = acc + terms[parts[:, col]]
    return acc


def solve_bruteforce(inst: Instance, cap: int = DEFAULT_CAP) -> SolveResult:
    """Global optimum over all partitions of ``Z``.

    Ties go to fewer classes, then to the lexicographically smallest vector.
    """
    if inst.Z > cap:
        raise CapacityError(f"Z={inst.Z} exceeds the enumeration cap {cap}")
    rows, parts, counts = _partition_table(inst.Z)
    profits = inst.V * _outputs(parts, inst.p) - counts * inst.W
    best = int(np.argmax(profits))
    return SolveResult(rows[best], float(profits[best]))


def solve_bruteforce_many(
    Z: int, p: float, Ws: Sequence[float], V: float = 1.0, cap: int = DEFAULT_CAP
) -> list[SolveResult]:
    """``solve_bruteforce`` for one ``(Z, p)`` and many costs, sharing the output table.

    Each result is identical, bit for bit, to the single-instance call.
    """
    for W in Ws:
        Instance(Z, p, W, V)
    if Z > cap:
        raise CapacityError(f"Z={Z} exceeds the enumeration cap {cap}")
    rows, parts, counts = _partition_table(Z)
    Ws = np.asarray(Ws, dtype=np.float64)
    profits = V * _outputs(parts, p)[:, None] - counts[:, None] * Ws[None, :]
    best = np.argmax(profits, axis=0)
    return [SolveResult(rows[b], float(profits[b, j])) for j, b in enumerate(best)]


def _best_balanced(inst: Instance, ks) -> SolveResult:
    best = None
    for k in ks:
        sizes = balanced(inst.Z, k)
        profit = evaluate_profit(inst, sizes)
        if best is None or profit > best.profit:
            best = SolveResult(sizes, profit)
    return best


def solve_balanced(inst: Instance) -> SolveResult:
    """Best balanced vector; agrees with ``solve_bruteforce`` on profitable schools."""
    Z = inst.Z
    ks = [k for k in range(1, Z + 1) if gap_allows(Z, k)]
    best = _best_balanced(inst, ks)
    if best.profitable:
        return best
    return _best_balanced(inst, range(1, Z + 1))


def fixed_class_count_best(inst: Instance, m: int, cap: int = DEFAULT_CAP) -> tuple[int, ...]:
    """Best vector among partitions of ``Z`` into exactly ``m`` classes.

    With ``m`` fixed the cost is constant, so this maximises output alone.
    """
    Z = inst.Z
    if int(m) != m or not 1 <= m <= Z:
        raise InvalidArgument(f"m must be an integer in 1..{Z}, got {m}")
    if m == 1:
        return (Z,)
    if m == Z:
        return (1,) * Z
    if m == 2:
        candidates = ((k, Z - k) for k in range(1, Z // 2 + 1))
    elif Z > cap:
        raise CapacityError(f"Z={Z} exceeds the enumeration cap {cap} for {m}-class search")
    else:
        candidates = partitions_with_parts(Z, m)
    best, best_out = None, None
    for sizes in candidates:
        out = evaluate_output(sizes, inst.p)
        if best is None or out > best_out:
            best, best_out = sizes, out
    return best


@dataclass(frozen=True)
class GapReport:
    Z: int
    m: int | None
    applicable: bool
    branch: str | None
    holds: bool | None


def gap_branch(Z: int, m: int) -> str | None:
    if m == Z:
        return "m == Z"
    if Z % 2 == 0 and m <= Z // 2:
        return "m <= Z/2"
    if Z % 2 == 1 and m <= (Z + 1) // 2:
        return "m <= (Z+1)/2"
    return None


def gap_check(inst: Instance, result: SolveResult | None = None) -> GapReport:
    """Check the class-count gap on the oracle optimum of a profitable school."""
    if result is None:
        result = solve_bruteforce(inst)
    if not result.profitable:
        return GapReport(inst.Z, result.m, False, None, None)
    branch = gap_branch(inst.Z, result.m)
    return GapReport(inst.Z, result.m, True, branch, branch is not None)


@dataclass(frozen=True)
class NearEqualReport:
    Z: int
    p: float
    W: float
    best: tuple[int, ...]
    spread: int
    profitable: bool

    @property
    def passed(self) -> bool:
        return self.spread <= 1 or not self.profitable


def near_equal_check(inst: Instance, result: SolveResult | None = None) -> NearEqualReport:
    if result is None:
        result = solve_bruteforce(inst)
    return NearEqualReport(inst.Z, inst.p, inst.W, result.best, result.spread, result.profitable)
