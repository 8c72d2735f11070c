"""Acceptance gate.

Nine criteria, each reported as one ``PASS``/``FAIL`` line.  Under pytest the
lines appear in the terminal summary; ``python tests/test_acceptance.py``
prints them directly.
"""
from __future__ import annotations

import time

import pytest

from classsize import core, multitype, polynomials, regions, solver, suites
from classsize.core import Instance

RESULTS: dict[int, str] = {}


def report(number: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f" ({detail})" if detail else "")
    RESULTS[number] = line
    print(line)
    return ok


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def criterion_1() -> bool:
    failures = []

    def case(name, ok, seconds):
        if not ok or seconds >= 1.0:
            failures.append(f"{name} ({seconds:.2f}s)")

    inst = Instance(5, 0.77, 1.2)
    best, t = _timed(solver.solve_bruteforce, inst)
    terms_ok = abs((2 * 0.77**2 - 1.2) + 0.0142) <= 1e-4 and abs((3 * 0.77**3 - 1.2) - 0.169599) <= 1e-4
    case("Z=5 p=0.77", best.best == (2, 3) and terms_ok and abs(best.profit - 0.155399) <= 1e-6, t)

    gamma, t = _timed(regions.gamma_counterexample)
    case("Z=5 W=0.673", gamma.reproduced, t)

    pair, t = _timed(solver.fixed_class_count_best, Instance(100, 0.95, 1.0), 2)
    out_pair = core.evaluate_output(pair, 0.95)
    out_even = core.evaluate_output((50, 50), 0.95)
    case("Z=100 two classes", pair == (23, 77) and abs(out_pair - 8.55) <= 0.01 and abs(out_even - 7.69) <= 0.01, t)

    mt = multitype.MultiTypeInstance((0.8, 0.5), (3, 3), 0.51)
    (alloc, profit), t = _timed(multitype.solve_multitype_bruteforce, mt)
    case("multi-type Z=6", abs(profit - 1.05) <= 0.005 and len(alloc.mixed_columns()) == 1, t)

    return report(1, "worked examples", not failures, "; ".join(failures) or "4 fixtures")


def criterion_2(records, seconds: float) -> bool:
    res = suites.near_equal_suite(records)
    ok = res.passed and seconds < 300
    return report(2, "near-equal optimum, balanced solver == oracle", ok,
                  f"{len(records)} instances, {res.checked} checks, {len(res.failures)} failures, sweep {seconds:.0f}s")


def criterion_3(records) -> bool:
    res = suites.gap_suite(records)
    return report(3, "class-count gap, all-singleton region, singleton bound, low-p rule", res.passed,
                  f"{res.checked} checks, {len(res.failures)} failures")


def criterion_4() -> bool:
    res, t = _timed(suites.integer_suite, 200)
    return report(4, "exact integer identities, Z <= 200", res.passed,
                  f"{res.checked} checks, {len(res.failures)} failures, {t:.1f}s")


def criterion_5() -> bool:
    res = suites.root_suite(60)
    c = polynomials.constant_c()
    ok = res.passed and abs(c - 0.52922) <= 5e-5
    return report(5, "root analytics, Z <= 60", ok,
                  f"c={c:.6f}, {res.notes['roots']} roots, {len(res.failures)} failures")


def criterion_6() -> bool:
    res = suites.conjecture_suite(range(5, 61))
    rep = res.notes["report"]
    defined = sum(1 for per_z in rep.roots.values() for r in per_z.values() if r is not None)
    listed = sum(1 for line in rep.lines() if not line.startswith(("Z,", "#")) and not line.endswith(",EQUAL"))
    ok = res.passed and rep.all_certified and listed == defined and res.notes["checks"] > 0
    return report(6, "crossing-root ordering scan, Z in 5..60", ok,
                  f"status {rep.status}, {defined} roots, {res.notes['checks']} comparisons")


def criterion_7(records) -> bool:
    res = suites.monotone_in_W_suite(records)
    gamma = regions.gamma_counterexample()
    ok = res.passed and gamma.reproduced
    return report(7, "m non-decreasing as W falls; non-monotone in p at Z=5", ok,
                  f"{res.checked} columns, witness m {gamma.low.optimal_m}->{gamma.high.optimal_m}")


def criterion_8(seed: int = 0) -> bool:
    res, t = _timed(suites.multitype_suite, None, 100, seed)
    ok = res.passed and t < 600
    return report(8, "multi-type forests, mixed-class bound, cycle breaking", ok,
                  f"{res.notes['instances']} optima, 100 cyclic starts, {len(res.failures)} failures, {t:.0f}s")


def criterion_9() -> bool:
    res = suites.threshold_suite(tol=1e-12, seed=0)
    return report(9, "scalar inequalities, swap gap and threshold probe", res.passed,
                  f"{res.checked} checks, {len(res.failures)} failures")


@pytest.fixture(scope="module")
def sweep():
    return _timed(suites.single_type_sweep, range(2, 31))


def test_criterion_1_worked_examples():
    assert criterion_1()


def test_criterion_2_near_equal_sweep(sweep):
    assert criterion_2(*sweep)


def test_criterion_3_structure_sweep(sweep):
    assert criterion_3(sweep[0])


def test_criterion_4_integer_identities():
    assert criterion_4()


def test_criterion_5_root_analytics():
    assert criterion_5()


def test_criterion_6_ordering_scan():
    assert criterion_6()


def test_criterion_7_monotone_in_cost(sweep):
    assert criterion_7(sweep[0])


def test_criterion_8_multitype_sweep():
    assert criterion_8()


def test_criterion_9_inequalities():
    assert criterion_9()


if __name__ == "__main__":
    records, seconds = _timed(suites.single_type_sweep, range(2, 31))
    outcomes = [
        criterion_1(),
        criterion_2(records, seconds),
        criterion_3(records),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(records),
        criterion_8(),
        criterion_9(),
    ]
    raise SystemExit(0 if all(outcomes) else 1)
