"""Verification sweeps shared by the test-suite and the ``verify`` command.

Each suite returns a :class:`SuiteResult`; a suite passes when it records no
failures.  Failures carry enough context to reproduce the offending case.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import core, multitype, polynomials, regions, solver
from .core import Instance, SolveResult


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, context) -> None:
        self.checked += 1
        if not ok:
            self.failures.append(context)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f", {len(self.failures)} failures" if self.failures else ""
        return f"{status}  {self.name} ({self.checked} checks{extra})"


def p_grid_for(Z: int, fine_up_to: int = 20) -> list[float]:
    """0.05..0.99 in steps of 0.01, coarsened to 0.05 (plus 0.99) for larger ``Z``."""
    if Z <= fine_up_to:
        return [round(0.05 + 0.01 * i, 2) for i in range(95)]
    return [round(0.05 * i, 2) for i in range(1, 20)] + [0.99]


def default_W_grid() -> list[float]:
    return [round(0.05 * i, 2) for i in range(1, 41)]


@dataclass(frozen=True)
class SweepRecord:
    Z: int
    p: float
    W: float
    brute: SolveResult
    fast: SolveResult


def single_type_sweep(
    Z_values: Iterable[int] = range(2, 31),
    W_grid: Sequence[float] | None = None,
    fine_up_to: int = 20,
) -> list[SweepRecord]:
    W_grid = default_W_grid() if W_grid is None else list(W_grid)
    records = []
    for Z in Z_values:
        for p in p_grid_for(Z, fine_up_to):
            for W in W_grid:
                inst = Instance(Z, p, W)
                records.append(SweepRecord(Z, p, W, solver.solve_bruteforce(inst), solver.solve_balanced(inst)))
    return records


def near_equal_suite(records: Sequence[SweepRecord]) -> SuiteResult:
    res = SuiteResult("near-equal optimum and balanced solver == oracle")
    for r in records:
        if r.brute.profitable:
            res.check(r.brute.spread <= 1, ("spread", r.Z, r.p, r.W, r.brute.best))
            res.check(r.fast == r.brute, ("mismatch", r.Z, r.p, r.W, r.brute, r.fast))
    return res


def gap_suite(records: Sequence[SweepRecord], tol: float = 1e-12) -> SuiteResult:
    """Structural rules on the oracle optimum.

    A cell whose optimal profit is within ``tol`` of zero sits on the
    profitability boundary (``W == p`` on a decimal grid gives an exact zero
    that rounding may push to either side); there the closed-form condition is
    only required to be tight as well.
    """
    res = SuiteResult("class-count gap, all-singleton region, singleton bound, low-p rule")
    for r in records:
        best, Z, p, W = r.brute, r.Z, r.p, r.W
        boundary = abs(best.profit) <= tol
        if best.profitable:
            res.check(solver.gap_allows(Z, best.m), ("gap", Z, p, W, best.best))
        margin = min(2 * p * (1 - p) - W, p - W)
        if boundary:
            res.check(margin <= tol, ("R(Z) boundary", Z, p, W, best.best))
        else:
            all_single = best.profitable and best.m == Z
            res.check(all_single == (margin > 0), ("R(Z)", Z, p, W, best.best))
        if W >= 2 * p * (1 - p):
            res.check(best.best.count(1) <= 1, ("singletons", Z, p, W, best.best))
        if p <= 0.5 and best.profitable:
            res.check(best.m == Z and p > W - tol, ("low p", Z, p, W, best.best))
        if Z >= 4:
            res.check(best.best != (1, Z - 1), ("(1,Z-1)", Z, p, W))
    return res


def subschool_suite(records: Sequence[SweepRecord], tol: float = 1e-12) -> SuiteResult:
    """Smallest and largest class of an optimum form an optimal two-class school."""
    res = SuiteResult("smallest/largest pair is an optimal two-class school")
    seen = set()
    for r in records:
        best = r.brute.best
        if len(best) < 2:
            continue
        lo, hi = best[0], best[-1]
        key = (lo, hi, r.p)
        if key in seen:
            continue
        seen.add(key)
        sub = Instance(lo + hi, r.p, r.W)
        pair = solver.fixed_class_count_best(sub, 2)
        res.check(
            core.evaluate_output((lo, hi), r.p) >= core.evaluate_output(pair, r.p) - tol,
            (r.Z, r.p, r.W, best, pair),
        )
    return res


def monotone_in_W_suite(records: Sequence[SweepRecord]) -> SuiteResult:
    """Along each ``(Z, p > 1/2)`` column, ``m`` never drops as ``W`` falls."""
    res = SuiteResult("optimal m non-decreasing as W decreases")
    columns: dict[tuple[int, float], list[tuple[float, int]]] = {}
    for r in records:
        if r.p > 0.5 and r.brute.profitable:
            columns.setdefault((r.Z, r.p), []).append((r.W, r.brute.m))
    for (Z, p), cells in columns.items():
        if len(cells) < 2:
            continue
        ms = [m for _, m in sorted(cells, reverse=True)]
        res.check(all(a <= b for a, b in zip(ms, ms[1:])), (Z, p, ms))
    return res


def worked_example_suite() -> SuiteResult:
    res = SuiteResult("worked examples")
    inst = Instance(5, 0.77, 1.2)
    best = solver.solve_bruteforce(inst)
    res.check(best.best == (2, 3), ("Z=5 p=.77", best))
    res.check(abs((2 * 0.77**2 - 1.2) - (-0.0142)) <= 1e-4, "2p^2-W")
    res.check(abs((3 * 0.77**3 - 1.2) - 0.169599) <= 1e-4, "3p^3-W")
    gamma = regions.gamma_counterexample()
    res.check(gamma.reproduced, ("gamma", gamma))
    pair = solver.fixed_class_count_best(Instance(100, 0.95, 1.0), 2)
    res.check(pair == (23, 77), ("Z=100", pair))
    res.check(abs(core.evaluate_output(pair, 0.95) - 8.55) <= 0.01, "8.55")
    res.check(abs(core.evaluate_output((50, 50), 0.95) - 7.69) <= 0.01, "7.69")
    mt = multitype.MultiTypeInstance((0.8, 0.5), (3, 3), 0.51)
    alloc, profit = multitype.solve_multitype_bruteforce(mt)
    res.check(abs(profit - 1.05) <= 0.005, ("multitype profit", profit))
    res.check(len(alloc.mixed_columns()) == 1, ("mixed", alloc))
    return res


def integer_suite(Z_max: int = 200) -> SuiteResult:
    """Exact checks on the balanced sizes and their sums of squares."""
    res = SuiteResult(f"integer identities for Z <= {Z_max}")
    for Z in range(2, Z_max + 1):
        top = min(Z, solver.half_count(Z) + 1)
        for k in range(2, top + 1):
            q_prev, r_prev = divmod(Z, k - 1)
            q, r = divmod(Z, k)
            res.check(q <= q_prev, ("q order", Z, k))
            if q == q_prev:
                res.check(r_prev > r, ("r order", Z, k))
        for k in range(2, Z):
            sd = polynomials.second_difference_S(Z, k)
            res.check(sd.convex, ("convexity", Z, k))
            res.check(sd.equality == polynomials.flat_step_conditions(Z, k), ("equality conds", Z, k))
        slopes = [
            polynomials.s_value(Z, k) - polynomials.s_value(Z, k - 1) for k in range(2, top + 1)
        ]
        res.check(all(a <= b for a, b in zip(slopes, slopes[1:])), ("slope order", Z))
        for k in range(2, top):
            f_k = polynomials.build_f_k(Z, k)
            f_next = polynomials.build_f_k(Z, k + 1)
            slope_k = sum(e * c for e, c in f_k.terms)
            slope_next = sum(e * c for e, c in f_next.terms)
            res.check(slope_k == slopes[k - 2], ("f_k'(1)", Z, k))
            same = f_k == f_next
            flat = polynomials.second_difference_S(Z, k).equality
            res.check(same == flat == (slope_k == slope_next), ("equivalence", Z, k))
    return res


def root_suite(Z_max: int = 60) -> SuiteResult:
    res = SuiteResult(f"crossing roots certified with side signs for Z <= {Z_max}")
    c = polynomials.constant_c()
    res.check(abs(c - 0.52922) <= 5e-5, ("c", c))
    res.check(abs(2 * c - c**4 - 0.98) <= 1e-12, ("c residual", c))
    roots = 0
    for Z in range(2, Z_max + 1):
        top = min(Z, solver.half_count(Z) + 1)
        for i in range(1, top + 1):
            for j in range(i + 1, top + 1):
                root = polynomials.crossing_root(Z, i, j)
                if root is None:
                    continue
                roots += 1
                res.check(root.certified and root.residual < 1e-10, ("certificate", Z, i, j, root))
                diff = polynomials.marginal(Z, j) - polynomials.marginal(Z, i)
                res.check(diff(root.p_ij / 2) > 0, ("below", Z, i, j))
                res.check(diff((1 + root.p_ij) / 2) < 0, ("above", Z, i, j))
    res.notes["roots"] = roots
    return res


def split_comparison_suite(Z_values: Iterable[int] = range(6, 61)) -> SuiteResult:
    """Two-class against three-class comparisons near the even split.

    ``p1 = c^(6/Z)`` lies where the two-class split loses to the most even
    three-class split, yet ``p1^Z`` stays above ``e^-4``; the roots that
    separate the regimes are larger still.
    """
    res = SuiteResult("two-class versus three-class comparison polynomials")
    floor = math.exp(-4)
    for Z in Z_values:
        p1 = polynomials.constants(Z).p_1
        res.check(p1**Z > floor, ("p1^Z", Z))
        b1, _, b3 = polynomials.TripartiteSplit(Z).betas
        for k in range(b3, Z // 2 + 1):
            f = polynomials.build_def1_f(Z, k)
            res.check(f(p1) < 0, ("f(p1)", Z, k))
            roots = [r.root for r in polynomials.roots_in_unit_interval(f)]
            if k == b3 and Z % 3 == 2:
                # one root below 1/2 and one above; only the upper one is bounded
                res.check(len(roots) == 2 and roots[0] < 0.5 < roots[1], ("two roots", Z, k, roots))
                res.check(bool(roots) and roots[-1] ** Z > floor, ("upper root", Z, k, roots))
            else:
                res.check(len(roots) == 1 and roots[0] ** Z > floor, ("single root", Z, k, roots))
        for k in range(1, b3):
            res.check(p1 < ((Z - 2 * k) / Z) ** (1 / k), ("g root", Z, k))
    return res


def descartes_suite(Z_max: int = 24) -> SuiteResult:
    """Positive roots found numerically never exceed the sign-change count and share its parity."""
    res = SuiteResult(f"root counts consistent with sign changes for Z <= {Z_max}")
    for Z in range(2, Z_max + 1):
        polys = []
        top = min(Z, solver.half_count(Z) + 1)
        polys += [polynomials.build_f_k(Z, k) for k in range(2, top + 1)]
        for i in range(1, top + 1):
            for j in range(i + 1, top + 1):
                diff = polynomials.marginal(Z, j) - polynomials.marginal(Z, i)
                if diff:
                    polys.append(diff)
        if Z >= 3:
            b3 = polynomials.TripartiteSplit(Z).betas[2]
            polys += [polynomials.build_def1_f(Z, k) for k in range(1, Z // 2 + 1)]
            polys += [polynomials.build_def1_g(Z, k) for k in range(1, b3)]
        for poly in polys:
            v = polynomials.sign_changes(poly)
            found = polynomials.positive_root_count(poly)
            res.check(found <= v and (v - found) % 2 == 0, (Z, poly, v, found))
    return res


def threshold_suite(tol: float = 1e-12, seed: int = 0) -> SuiteResult:
    res = SuiteResult("scalar inequalities and threshold probe")
    xs = np.linspace(-10, 10, 2001)
    for a in (-0.5, -0.55, -0.6, -0.75, -1.0, -2.0, -5.0):
        for x in xs:
            v = core.exp_pair_sum(float(x), a)
            res.check(v <= 2 + tol, ("pair <= 2", a, x, v))
            if abs(x) >= 1e-2:
                res.check(v < 2, ("pair strict", a, x, v))
    small = np.linspace(0, 0.5, 501)[1:]
    for a in (-0.49, -0.4, -0.25, -0.1):
        res.check(any(core.exp_pair_sum(float(x), a) > 2 for x in small), ("pair exceeds", a))
    for d in np.linspace(math.exp(-2), 1, 201)[:-1]:
        for w in np.linspace(0, 1, 201):
            res.check(core.tilted_power_pair(float(d), float(w)) <= 2 + tol, ("tilted", d, w))
    for q in np.linspace(math.exp(-4), 1, 201):
        for lam in np.linspace(0, 1, 201):
            v = core.two_class_share_output(float(lam), float(q))
            res.check(v <= math.sqrt(q) + tol, ("share", q, lam))
            if abs(lam - 0.5) >= 0.1 and q <= 0.9:
                res.check(v < math.sqrt(q), ("share strict", q, lam))
    grid = [0.05 * i for i in range(1, 20)]
    for p in grid:
        for q in grid:
            if p == q:
                continue
            for u in range(1, 11):
                for v in range(1, 11):
                    res.check(multitype.swap_gap(p, q, u, v) > 0, ("swap", p, q, u, v))
    res.check(polynomials.probe_A(2, -0.4, seed=seed).violation_found, "probe a=-0.4")
    res.check(not polynomials.probe_A(2, -0.6, seed=seed).violation_found, "probe a=-0.6")
    return res


def conjecture_suite(Z_values: Iterable[int] = range(5, 61)) -> SuiteResult:
    report = regions.conjecture_a_scan(Z_values)
    res = SuiteResult("crossing-root ordering scan")
    for per_z in report.roots.values():
        for root in per_z.values():
            if root is not None:
                res.check(root.certified, root)
    res.notes["status"] = report.status
    res.notes["checks"] = len(report.checks)
    res.notes["violations"] = report.violations
    res.notes["report"] = report
    return res


def _count_vectors(Z: int, s: int):
    if s == 1:
        yield (Z,)
        return
    for first in range(1, Z - s + 2):
        for rest in _count_vectors(Z - first, s - 1):
            yield (first,) + rest


def multitype_instances(
    Z_max: int = 10,
    s_values: Sequence[int] = (2, 3),
    prob_sets: dict[int, Sequence[Sequence[float]]] | None = None,
    W_values: Sequence[float] = (0.3, 0.6, 0.9, 1.2),
):
    prob_sets = prob_sets or {
        2: [(0.3, 0.6), (0.6, 0.9), (0.3, 0.9), (0.5, 0.8)],
        3: [(0.3, 0.6, 0.9), (0.5, 0.7, 0.8)],
    }
    for s in s_values:
        for Z in range(s, Z_max + 1):
            for counts in _count_vectors(Z, s):
                for probs in prob_sets[s]:
                    for W in W_values:
                        yield multitype.MultiTypeInstance(probs, counts, W)


def multitype_suite(
    instances: Iterable[multitype.MultiTypeInstance] | None = None,
    random_cyclic: int = 100,
    seed: int = 0,
) -> SuiteResult:
    res = SuiteResult("multi-type forest structure and cycle breaking")
    instances = list(multitype_instances() if instances is None else instances)
    path_cases = 0
    for inst in instances:
        alloc, profit = multitype.solve_multitype_bruteforce(inst)
        report = multitype.verify_structure(alloc, inst.s)
        res.check(report.is_forest and report.within_bound, ("structure", inst, alloc.rows))
        if report.path_condition is not None:
            path_cases += 1
            res.check(report.path_condition, ("path", inst, alloc.rows))
        res.check(multitype.cycle_break_improve(inst, alloc) is None, ("improvable", inst))
        spreads = multitype.segregated_spreads(alloc)
        res.check(all(v <= 1 for v in spreads.values()), ("segregated", inst, alloc.rows))
        single = multitype.singleton_bound_check(inst, alloc, profit)
        if single.applicable:
            res.check(single.singleton_ok, ("singletons", inst, alloc.rows))
            if single.profitable:
                res.check(single.gap_ok, ("gap", inst, alloc.rows))
    res.notes["instances"] = len(instances)
    res.notes["path_cases"] = path_cases

    rng = random.Random(seed)
    improved = 0
    while improved < random_cyclic:
        inst, alloc = random_cyclic_allocation(rng)
        base = multitype.evaluate_multitype(inst, alloc)
        nxt = multitype.cycle_break_improve(inst, alloc)
        res.check(nxt is not None and multitype.evaluate_multitype(inst, nxt) > base, ("random", inst, alloc.rows))
        improved += 1
    return res


def random_cyclic_allocation(rng: random.Random):
    """A random allocation whose type/class graph contains a cycle."""
    s = rng.choice((2, 3))
    probs = tuple(rng.sample([0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], s))
    m = rng.randint(2, 4)
    rows = [[rng.randint(0, 3) for _ in range(m)] for _ in range(s)]
    # force a 4-cycle on rows 0, 1 and columns 0, 1
    for i in (0, 1):
        for j in (0, 1):
            rows[i][j] = max(rows[i][j], 1)
    for row in rows:
        if not any(row):
            row[rng.randrange(m)] = 1
    for j in range(m):
        if not any(rows[i][j] for i in range(s)):
            rows[0][j] = 1
    counts = tuple(sum(r) for r in rows)
    inst = multitype.MultiTypeInstance(probs, counts, rng.choice((0.3, 0.6, 0.9)))
    return inst, multitype.AllocationMatrix.from_rows(rows)


def quick_suites(seed: int = 0) -> list[SuiteResult]:
    """Reduced grids, for the ``verify`` command."""
    records = single_type_sweep(range(2, 13), W_grid=[round(0.1 * i, 1) for i in range(1, 21)])
    return [
        worked_example_suite(),
        near_equal_suite(records),
        gap_suite(records),
        subschool_suite(records),
        monotone_in_W_suite(records),
        integer_suite(60),
        root_suite(20),
        split_comparison_suite(range(6, 31)),
        descartes_suite(16),
        threshold_suite(seed=seed),
        conjecture_suite(range(5, 21)),
        multitype_suite(multitype_instances(Z_max=7), random_cyclic=20, seed=seed),
    ]
