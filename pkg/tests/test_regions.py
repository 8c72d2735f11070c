import numpy as np
import pytest

from classsize.core import Instance, evaluate_profit
from classsize.errors import InvalidArgument
from classsize.regions import (
    admissible_labels,
    average_value,
    boundary_distance,
    classify_point,
    classify_row,
    conjecture_a_scan,
    emit_atlas,
    find_label_increase,
    gamma_counterexample,
    in_L,
    in_trimmed_L,
    junction_points,
    l_labels,
    monotonic_in_W,
    parse_cells,
    profitability_constraint,
)
from classsize.solver import gap_allows, solve_bruteforce

COARSE_P = [round(0.02 * i, 2) for i in range(1, 50)]
COARSE_W = [round(0.025 * i, 3) for i in range(1, 81)]


class TestClassify:
    def test_higher_p_raises_class_count(self):
        low = classify_point(0.60, 0.673, 5)
        high = classify_point(0.62, 0.673, 5)
        assert (low.optimal_m, low.profitable) == (2, True)
        assert (high.optimal_m, high.profitable) == (3, True)
        assert low.L_label == 2 and high.L_label == 3

    def test_higher_p_report(self):
        report = gamma_counterexample()
        assert report.reproduced
        assert report.low.profit == evaluate_profit(Instance(5, 0.60, 0.673), (2, 3))
        assert report.high.profit == evaluate_profit(Instance(5, 0.62, 0.673), (1, 2, 2))

    @pytest.mark.parametrize("Z", [2, 7, 15, 80])
    def test_all_singletons_corner(self, Z):
        cell = classify_point(0.9, 0.1, Z)
        assert cell.optimal_m == Z and cell.L_label == Z
        assert in_L(Z, 0.9, 0.1, Z)

    def test_rejects(self):
        with pytest.raises(InvalidArgument):
            classify_point(1.0, 0.5, 5)
        with pytest.raises(InvalidArgument):
            in_L(4, 0.5, 0.1, 5)

    def test_row_matches_points(self):
        Ws = [round(0.01 * i, 2) for i in range(1, 200)]
        for Z in (3, 8):
            for p in (0.31, 0.66, 0.97):
                row = classify_row(p, Ws, Z)
                points = [classify_point(p, W, Z) for W in Ws]
                assert row == points
                assert [c.profit for c in row] == [c.profit for c in points]


class TestLabels:
    def test_admissible(self):
        assert admissible_labels(10) == [1, 2, 3, 4, 5, 10]
        assert admissible_labels(7) == [1, 2, 3, 4, 7]

    @pytest.mark.parametrize("Z", [1, 2, 3, 5, 6, 9, 12])
    def test_disjoint_and_equal_to_optimum(self, Z):
        checked = 0
        for p in COARSE_P:
            for W in COARSE_W:
                labels = l_labels(p, W, Z)
                assert len(labels) <= 1
                if boundary_distance(p, W, Z) <= 1e-12:
                    continue
                result = solve_bruteforce(Instance(Z, p, W))
                expected = [result.m] if result.profitable else []
                assert labels == expected, (p, W)
                checked += 1
        assert checked > 0.99 * len(COARSE_P) * len(COARSE_W)

    def test_trimmed_inside(self):
        for Z in (5, 7, 9):
            for p in COARSE_P:
                for W in COARSE_W[:40]:
                    for k in admissible_labels(Z):
                        if in_trimmed_L(k, p, W, Z):
                            assert in_L(k, p, W, Z)


class TestBoundaries:
    @pytest.mark.parametrize("Z", [4, 7, 12, 20])
    def test_junction_identity(self, Z):
        found = 0
        for k in range(2, (Z + 1) // 2 + 2):
            if k > Z:
                break
            for p in junction_points(Z, k):
                gap = average_value(Z, k - 1, p) - average_value(Z, k, p)
                assert abs(gap) < 1e-10
                found += 1
        assert found > 0

    def test_constraint_non_decreasing(self):
        for Z in (3, 6, 11):
            values = [profitability_constraint(Z, p) for p in np.linspace(0.01, 0.99, 197)]
            assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_profitability_constraint(self):
        for Z in (5, 10):
            for p in (0.3, 0.7, 0.95):
                C = profitability_constraint(Z, p)
                assert solve_bruteforce(Instance(Z, p, C * 0.999)).profitable
                assert not solve_bruteforce(Instance(Z, p, C * 1.001)).profitable


class TestMonotone:
    def test_ten_students_high_p(self):
        Ws = [round(1.5 - 0.05 * i, 2) for i in range(30)]
        report = monotonic_in_W(0.9, Ws, 10)
        assert report.applicable and report.monotone

    def test_low_p_stays_singletons(self):
        report = monotonic_in_W(0.4, [0.35, 0.2, 0.05], 8)
        assert report.applicable and set(report.ms) == {8}

    def test_single_cost(self):
        assert monotonic_in_W(0.8, [0.3], 6).monotone

    def test_unprofitable_is_not_applicable(self):
        report = monotonic_in_W(0.8, [50.0, 0.3], 6)
        assert not report.applicable and report.monotone is None

    def test_requires_decreasing(self):
        with pytest.raises(InvalidArgument):
            monotonic_in_W(0.8, [0.3, 0.4], 6)


class TestLabelIncrease:
    @pytest.mark.parametrize("Z", [5, 7, 9])
    def test_odd_schools(self, Z):
        witness = find_label_increase(Z, 1)
        assert witness is not None and witness.p < witness.p_prime
        assert solve_bruteforce(Instance(Z, witness.p, witness.W)).m == 1
        assert solve_bruteforce(Instance(Z, witness.p_prime, witness.W)).m == 2


class TestAtlas:
    def test_class_count_increase_on_default_grid(self):
        atlas = emit_atlas(5)
        cells = {(c.p, c.W): c for c in atlas.cells}
        assert cells[(0.6, 0.673)].L_label == 2
        assert cells[(0.62, 0.673)].L_label == 3

    def test_ten_students_gap(self):
        atlas = emit_atlas(10, COARSE_P, COARSE_W)
        for c in atlas.cells:
            if c.profitable:
                assert gap_allows(10, c.optimal_m)
                assert c.optimal_m in {1, 2, 3, 4, 5, 10}
            if c.profitable and c.p <= 0.5:
                assert c.optimal_m == 10

    def test_fifty_by_fifty(self):
        p_grid = list(np.round(np.linspace(0.02, 0.98, 50), 6))
        W_grid = list(np.round(np.linspace(0.02, 2.0, 50), 6))
        atlas = emit_atlas(10, p_grid, W_grid)
        assert len(atlas.cells) == 2500
        for c in atlas.cells:
            if c.profitable and boundary_distance(c.p, c.W, 10) > 1e-12:
                assert c.L_label == c.optimal_m

    def test_round_trip(self):
        atlas = emit_atlas(6, COARSE_P[::3], COARSE_W[::4])
        text = atlas.cells_csv()
        assert text.splitlines()[0] == "p,W,optimal_m,L_label,profitable,profit"
        assert parse_cells(text) == atlas.cells

    def test_deterministic(self):
        a = emit_atlas(7, COARSE_P[::5], COARSE_W[::5])
        b = emit_atlas(7, COARSE_P[::5], COARSE_W[::5])
        assert a.cells_csv() == b.cells_csv() and a.curves_csv() == b.curves_csv()

    def test_curves(self):
        atlas = emit_atlas(6, [0.5, 0.9], [0.1])
        lines = atlas.curves_csv().splitlines()
        assert lines[0] == "curve,k,p,W"
        assert {line.split(",")[0] for line in lines[1:]} == {"f", "avg", "C"}

    @pytest.mark.parametrize("p_grid,W_grid", [([], [0.1]), ([0.5], []), ([0.5, 0.4], [0.1]), ([0.5], [0.0])])
    def test_bad_grids(self, p_grid, W_grid):
        with pytest.raises(InvalidArgument):
            emit_atlas(5, p_grid, W_grid)


class TestConjectureScan:
    def test_small_schools(self):
        report = conjecture_a_scan([5, 6])
        for Z in (5, 6):
            assert report.roots[Z][(2, 3)].p_ij < report.roots[Z][(1, 2)].p_ij
        lines = report.lines()
        assert lines[0] == "Z,i,j,p_ij,margin,status"
        assert any(line.startswith("5,2,3,") and line.endswith(",OK") for line in lines)
        assert lines[-1] == "# status: VIOLATION-FREE"

    def test_range_certified(self):
        report = conjecture_a_scan(range(6, 21))
        assert report.all_certified
        assert report.status == "VIOLATION-FREE"
        assert report.checks

    def test_range_limits(self):
        with pytest.raises(InvalidArgument):
            conjecture_a_scan([1])
