"""Mapping the ``(p, W)`` plane into regions by optimal class count.

A cell is labelled by the oracle's optimal class count ``m`` and, separately,
by the inequality-defined region ``L(k)`` it falls in.  The two labels are
expected to agree on every profitable cell.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Instance, evaluate_output
from .errors import InvalidArgument
from .polynomials import (
    crossing_root,
    output_poly,
    peak_point,
    roots_in_unit_interval,
)
from .solver import DEFAULT_CAP, balanced, half_count, solve_balanced, solve_bruteforce, solve_bruteforce_many


def _output(Z: int, k: int, p: float) -> float:
    return evaluate_output(balanced(Z, k), p)


def marginal_value(Z: int, k: int, p: float) -> float:
    """Output gained by moving from ``k - 1`` to ``k`` balanced classes."""
    return _output(Z, k, p) - _output(Z, k - 1, p)


def average_value(Z: int, k: int, p: float) -> float:
    """Output per class of the balanced ``k``-class vector."""
    return _output(Z, k, p) / k


def admissible_labels(Z: int) -> list[int]:
    labels = list(range(1, half_count(Z) + 1))
    if Z not in labels:
        labels.append(Z)
    return labels


def in_L(k: int, p: float, W: float, Z: int) -> bool:
    """Membership of ``(p, W)`` in the inequality-defined region for ``k`` classes."""
    if k not in admissible_labels(Z):
        raise InvalidArgument(f"k={k} is not an admissible label for Z={Z}")
    if k == 1:
        below = W < _output(Z, 1, p)
        return below and (Z == 1 or marginal_value(Z, 2, p) <= W)
    if k == Z:
        return W < 2 * p * (1 - p) and W < p
    return marginal_value(Z, k + 1, p) <= W < marginal_value(Z, k, p) and W < average_value(Z, k, p)


def boundary_distance(p: float, W: float, Z: int) -> float:
    """Distance in ``W`` from ``(p, W)`` to the nearest region boundary at ``p``.

    Cells closer than rounding error to a boundary are ties whose side is
    decided by floating point, not by the model.
    """
    values = [2 * p * (1 - p), p, _output(Z, 1, p)]
    values += [marginal_value(Z, k, p) for k in range(2, min(Z, half_count(Z) + 1) + 1)]
    values += [average_value(Z, k, p) for k in range(1, half_count(Z) + 1)]
    return min(abs(W - v) for v in values)


def l_labels(p: float, W: float, Z: int) -> list[int]:
    return [k for k in admissible_labels(Z) if in_L(k, p, W, Z)]


@dataclass(frozen=True)
class RegionCell:
    p: float
    W: float
    optimal_m: int
    L_label: int | None
    profitable: bool
    profit: float = field(default=math.nan, compare=False)


def _solve(Z: int, p: float, W: float, cap: int):
    inst = Instance(Z, p, W)
    if Z <= cap:
        return solve_bruteforce(inst, cap)
    return solve_balanced(inst)


def classify_point(p: float, W: float, Z: int, cap: int = DEFAULT_CAP) -> RegionCell:
    if not 0 < p < 1 or not W > 0:
        raise InvalidArgument(f"need 0 < p < 1 and W > 0, got p={p}, W={W}")
    result = _solve(Z, p, W, cap)
    labels = l_labels(p, W, Z)
    label = labels[0] if len(labels) == 1 else None
    return RegionCell(p, W, result.m, label, result.profitable, result.profit)


def _label_masks(p: float, Ws: np.ndarray, Z: int) -> dict[int, np.ndarray]:
    """``in_L`` for every admissible label over a vector of costs."""
    masks = {}
    for k in admissible_labels(Z):
        if k == 1:
            mask = Ws < _output(Z, 1, p)
            if Z > 1:
                mask &= marginal_value(Z, 2, p) <= Ws
            masks[k] = mask
        elif k == Z:
            masks[k] = (Ws < 2 * p * (1 - p)) & (Ws < p)
        else:
            masks[k] = (
                (marginal_value(Z, k + 1, p) <= Ws)
                & (Ws < marginal_value(Z, k, p))
                & (Ws < average_value(Z, k, p))
            )
    return masks


def classify_row(p: float, Ws: Sequence[float], Z: int, cap: int = DEFAULT_CAP) -> list[RegionCell]:
    """``classify_point`` for one ``p`` and many ``W``, with identical results."""
    if not 0 < p < 1 or not all(W > 0 for W in Ws):
        raise InvalidArgument(f"need 0 < p < 1 and W > 0, got p={p}")
    if Z <= cap:
        results = solve_bruteforce_many(Z, p, Ws, cap=cap)
    else:
        results = [solve_balanced(Instance(Z, p, W)) for W in Ws]
    masks = _label_masks(p, np.asarray(Ws, dtype=np.float64), Z)
    cells = []
    for j, (W, result) in enumerate(zip(Ws, results)):
        labels = [k for k, mask in masks.items() if mask[j]]
        label = labels[0] if len(labels) == 1 else None
        cells.append(RegionCell(p, W, result.m, label, result.profitable, result.profit))
    return cells


@dataclass(frozen=True)
class MonotoneReport:
    p: float
    Ws: tuple[float, ...]
    ms: tuple[int, ...]
    applicable: bool
    monotone: bool | None


def monotonic_in_W(p: float, Ws: Sequence[float], Z: int, cap: int = DEFAULT_CAP) -> MonotoneReport:
    """Optimal class count along a decreasing sequence of teacher costs."""
    Ws = tuple(Ws)
    if any(b >= a for a, b in zip(Ws, Ws[1:])):
        raise InvalidArgument("W sequence must be strictly decreasing")
    results = [_solve(Z, p, W, cap) for W in Ws]
    ms = tuple(r.m for r in results)
    if not all(r.profitable for r in results):
        return MonotoneReport(p, Ws, ms, False, None)
    return MonotoneReport(p, Ws, ms, True, all(a <= b for a, b in zip(ms, ms[1:])))


@dataclass(frozen=True)
class GammaReport:
    Z: int
    W: float
    low: RegionCell
    high: RegionCell

    @property
    def reproduced(self) -> bool:
        return (
            self.low.profitable
            and self.high.profitable
            and self.low.optimal_m == 2
            and self.high.optimal_m == 3
        )


def gamma_counterexample(Z: int = 5, W: float = 0.673, p_low: float = 0.60, p_high: float = 0.62) -> GammaReport:
    """Raising ``p`` at fixed ``W`` can raise the optimal class count."""
    return GammaReport(Z, W, classify_point(p_low, W, Z), classify_point(p_high, W, Z))


# Boundary curves -----------------------------------------------------------


def profitability_constraint(Z: int, p: float) -> float:
    """Largest ``W`` at which the school is still profitable: best output per class."""
    return max(average_value(Z, k, p) for k in range(1, Z + 1))


def junction_points(Z: int, k: int) -> list[float]:
    """Where ``W = f_k(p)`` meets ``W = V(Q_k, p)/k`` inside ``(0, 1)``."""
    if not 2 <= k <= min(Z, half_count(Z) + 1):
        raise InvalidArgument(f"k out of range for Z={Z}: {k}")
    poly = (k - 1) * output_poly(Z, k) - k * output_poly(Z, k - 1)
    return [r.root for r in roots_in_unit_interval(poly)]


def in_trimmed_L(k: int, p: float, W: float, Z: int) -> bool:
    """``L(k)`` without the corner left of and below the peak of ``f_{k+1}``.

    The corner is removed only when the upper boundary of ``L(k)`` meets
    ``W = f_{k+1}(p)`` to the left of that peak.
    """
    if not in_L(k, p, W, Z):
        return False
    if k == Z or k + 1 > min(Z, half_count(Z) + 1):
        return True
    s, peak = peak_point(Z, k + 1).point
    if _meets_left_of_peak(Z, k, s) and p < s and W < peak:
        return False
    return True


def _meets_left_of_peak(Z: int, k: int, s: float) -> bool:
    # V(Q_k)/k = f_{k+1}  <=>  (k + 1) V(Q_k) - k V(Q_{k+1}) = 0
    poly = (k + 1) * output_poly(Z, k) - k * output_poly(Z, k + 1)
    return any(r.root < s for r in roots_in_unit_interval(poly))


@dataclass(frozen=True)
class PIncreaseWitness:
    Z: int
    W: float
    p: float
    p_prime: float
    from_label: int
    to_label: int


def find_label_increase(Z: int, k: int = 1, samples: int = 200) -> PIncreaseWitness | None:
    """Search for ``(p, W)`` in ``L(k)`` and ``p' > p`` with ``(p', W)`` in ``L(k + 1)``.

    Such points can only sit between the junction of the upper boundary of
    ``L(k)`` with ``W = f_{k+1}(p)`` and the peak of ``f_{k+1}``, so candidates
    are drawn from that strip.
    """
    if k + 1 > min(Z, half_count(Z) + 1) or k + 1 not in admissible_labels(Z):
        return None
    s, _ = peak_point(Z, k + 1).point
    poly = (k + 1) * output_poly(Z, k) - k * output_poly(Z, k + 1)
    for junction in (r.root for r in roots_in_unit_interval(poly) if r.root < s):
        for t in range(1, samples):
            p = junction + (s - junction) * t / samples
            p_prime = 0.5 * (p + s)
            W = 0.5 * (marginal_value(Z, k + 1, p) + marginal_value(Z, k + 1, p_prime))
            if in_L(k, p, W, Z) and in_L(k + 1, p_prime, W, Z):
                return PIncreaseWitness(Z, W, p, p_prime, k, k + 1)
    return None


# Atlas ---------------------------------------------------------------------


@dataclass
class Atlas:
    Z: int
    cells: list[RegionCell]
    curves: list[tuple[str, int | None, float, float]]

    def label_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for cell in self.cells:
            key = str(cell.optimal_m) if cell.profitable else "unprofitable"
            counts[key] = counts.get(key, 0) + 1
        return counts

    def cells_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "W", "optimal_m", "L_label", "profitable", "profit"])
        for c in self.cells:
            writer.writerow([
                _fmt(c.p), _fmt(c.W), c.optimal_m, "" if c.L_label is None else c.L_label,
                int(c.profitable), _fmt(c.profit),
            ])
        return buf.getvalue()

    def curves_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["curve", "k", "p", "W"])
        for name, k, p, W in self.curves:
            writer.writerow([name, "" if k is None else k, _fmt(p), _fmt(W)])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def parse_cells(text: str) -> list[RegionCell]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        RegionCell(
            float(r["p"]), float(r["W"]), int(r["optimal_m"]),
            int(r["L_label"]) if r["L_label"] else None,
            bool(int(r["profitable"])), float(r["profit"]),
        )
        for r in rows
    ]


def default_p_grid() -> list[float]:
    return [round(i / 100, 2) for i in range(1, 100)]


def default_W_grid(Z: int) -> list[float]:
    """Steps of 0.001 up to 1, where the interior boundaries crowd together,
    then steps of 0.01 up to the one-class output at ``p = 0.99``."""
    top = max(1.0, _output(Z, 1, 0.99))
    fine = [round(i / 1000, 3) for i in range(1, 1001)]
    coarse = [round(i / 100, 2) for i in range(101, math.ceil(top * 100) + 1)]
    return fine + coarse


def _check_grid(grid: Sequence[float], lo: float, hi: float | None, name: str) -> None:
    if not grid:
        raise InvalidArgument(f"{name} grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgument(f"{name} grid must be strictly increasing")
    if grid[0] <= lo or (hi is not None and grid[-1] >= hi):
        raise InvalidArgument(f"{name} grid leaves its domain")


def emit_atlas(
    Z: int, p_grid: Sequence[float] | None = None, W_grid: Sequence[float] | None = None,
    cap: int = DEFAULT_CAP,
) -> Atlas:
    """One cell per grid point (p-major) plus sampled boundary curves."""
    p_grid = list(default_p_grid() if p_grid is None else p_grid)
    W_grid = list(default_W_grid(Z) if W_grid is None else W_grid)
    _check_grid(p_grid, 0.0, 1.0, "p")
    _check_grid(W_grid, 0.0, None, "W")
    cells = [cell for p in p_grid for cell in classify_row(p, W_grid, Z, cap)]
    top = min(Z, half_count(Z) + 1)
    curves: list[tuple[str, int | None, float, float]] = []
    for k in range(2, top + 1):
        curves += [("f", k, p, marginal_value(Z, k, p)) for p in p_grid]
    for k in range(1, half_count(Z) + 1):
        curves += [("avg", k, p, average_value(Z, k, p)) for p in p_grid]
    curves += [("C", None, p, profitability_constraint(Z, p)) for p in p_grid]
    return Atlas(Z, cells, curves)


# Crossing-root ordering scan ----------------------------------------------


@dataclass(frozen=True)
class OrderingCheck:
    """``smaller <= larger`` between two crossing roots, keyed by index pairs."""

    Z: int
    rule: str
    smaller: tuple[int, int]
    larger: tuple[int, int]
    margin: float

    @property
    def holds(self) -> bool:
        return self.margin >= -1e-12


@dataclass
class ConjectureReport:
    roots: dict[int, dict[tuple[int, int], object]]
    checks: list[OrderingCheck]

    @property
    def violations(self) -> list[OrderingCheck]:
        return [c for c in self.checks if not c.holds]

    @property
    def status(self) -> str:
        return "VIOLATIONS-FOUND" if self.violations else "VIOLATION-FREE"

    @property
    def all_certified(self) -> bool:
        return all(
            r.certified for per_z in self.roots.values() for r in per_z.values() if r is not None
        )

    def lines(self) -> list[str]:
        attached: dict[tuple[int, tuple[int, int]], list[OrderingCheck]] = {}
        for c in self.checks:
            attached.setdefault((c.Z, c.smaller if c.rule != "A2" else c.larger), []).append(c)
        out = ["Z,i,j,p_ij,margin,status"]
        for Z in sorted(self.roots):
            for (i, j), root in sorted(self.roots[Z].items()):
                if root is None:
                    out.append(f"{Z},{i},{j},,,EQUAL")
                    continue
                mine = attached.get((Z, (i, j)), [])
                if not mine:
                    margin, status = "", "UNCHECKED"
                else:
                    worst = min(c.margin for c in mine)
                    margin = _fmt(worst)
                    status = "OK" if all(c.holds for c in mine) else "VIOLATION"
                if not root.certified:
                    status = "UNCERTIFIED"
                out.append(f"{Z},{i},{j},{_fmt(root.p_ij)},{margin},{status}")
        out.append(f"# status: {self.status}")
        return out


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def conjecture_a_scan(Z_values: Iterable[int]) -> ConjectureReport:
    """Compute every crossing root and compare the predicted orderings.

    Index 1 stands for the single-class output.  A violation is reported, not
    raised.
    """
    roots: dict[int, dict[tuple[int, int], object]] = {}
    checks: list[OrderingCheck] = []
    for Z in Z_values:
        if Z < 2 or Z > 200:
            raise InvalidArgument(f"Z must lie in 2..200, got {Z}")
        top = min(Z, half_count(Z) + 1)
        per_z = {(i, j): crossing_root(Z, i, j) for i in range(1, top + 1) for j in range(i + 1, top + 1)}
        roots[Z] = per_z

        def root(i, j):
            r = per_z.get(_pair(i, j))
            return None if r is None else r.p_ij

        def add(rule, small, large):
            a, b = root(*small), root(*large)
            if a is not None and b is not None:
                checks.append(OrderingCheck(Z, rule, _pair(*small), _pair(*large), b - a))

        idx = range(2, top + 1)
        for k in range(2, top):
            for i in idx:
                if i > k + 1:
                    add("A1", (i, k), (k, k + 1))
                if i < k:
                    add("A2", (k, k + 1), (i, k + 1))
        for i in idx:
            for j in idx:
                for k in idx:
                    if k > j and i not in (j, k):
                        add("29a", (i, k), (i, j))
        for i in range(3, top + 1):
            add("29b", (2, i), (2, 1))
    return ConjectureReport(roots, checks)
