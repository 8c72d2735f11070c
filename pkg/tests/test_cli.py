import json
import subprocess
import sys

import pytest

from classsize.cli import main
from classsize.regions import parse_cells


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSolve:
    def test_small_school(self, capsys):
        code, out, _ = run(capsys, "solve", "--Z", "5", "--p", "0.77", "--W", "1.2")
        assert code == 0
        assert "sizes: 2,3" in out and "profit: 0.155399" in out
        assert "balanced solver agrees: yes" in out

    def test_higher_p_point(self, capsys):
        code, out, _ = run(capsys, "solve", "--Z", "5", "--p", "0.62", "--W", "0.673")
        assert code == 0 and "sizes: 1,2,2" in out

    def test_one_student(self, capsys):
        code, out, _ = run(capsys, "solve", "--Z", "1", "--p", "0.5", "--W", "0.1")
        assert code == 0 and "sizes: 1\n" in out and "profit: 0.400000" in out

    def test_json(self, capsys):
        code, out, _ = run(capsys, "solve", "--Z", "5", "--p", "0.77", "--W", "1.2", "--format", "json")
        record = json.loads(out)
        assert record["sizes"] == [2, 3] and record["profitable"] is True
        assert record["profit"] == pytest.approx(0.155399, abs=1e-6)

    def test_beyond_cap_uses_balanced(self, capsys):
        code, out, _ = run(capsys, "solve", "--Z", "90", "--p", "0.9", "--W", "0.1")
        assert code == 0 and "method: balanced" in out

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# school\nZ = 5\np = 0.77\nW = 1.2\n")
        code, out, _ = run(capsys, "solve", "--config", str(cfg))
        assert code == 0 and "sizes: 2,3" in out
        code, out, _ = run(capsys, "solve", "--config", str(cfg), "--p", "0.62", "--W", "0.673")
        assert "sizes: 1,2,2" in out

    @pytest.mark.parametrize(
        "argv",
        [
            ["solve", "--Z", "5", "--p", "1.5", "--W", "1"],
            ["solve", "--Z", "5", "--p", "0.5"],
            ["solve", "--Z", "five", "--p", "0.5", "--W", "1"],
            ["bogus"],
            [],
        ],
    )
    def test_usage_errors(self, capsys, argv):
        assert main(argv) == 2

    def test_missing_config(self, capsys, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "none.cfg")]) == 2


class TestAtlas:
    def test_default_grid_has_class_count_increase(self, capsys, tmp_path):
        prefix = tmp_path / "z5"
        code, out, _ = run(capsys, "atlas", "--Z", "5", "--out", str(prefix))
        assert code == 0
        cells = {(c.p, c.W): c for c in parse_cells((tmp_path / "z5_cells.csv").read_text())}
        assert cells[(0.6, 0.673)].L_label == 2
        assert cells[(0.62, 0.673)].L_label == 3
        assert (tmp_path / "z5_curves.csv").read_text().startswith("curve,k,p,W\n")

    def test_ten_students(self, capsys, tmp_path):
        prefix = tmp_path / "z10"
        code, _, _ = run(capsys, "atlas", "--Z", "10", "--p-grid", "0.02:0.98:25", "--W-grid", "0.05:2:40", "--out", str(prefix))
        assert code == 0
        cells = parse_cells((tmp_path / "z10_cells.csv").read_text())
        assert len(cells) == 1000
        assert {c.optimal_m for c in cells if c.profitable} <= {1, 2, 3, 4, 5, 10}

    def test_deterministic(self, capsys, tmp_path):
        for name in ("a", "b"):
            run(capsys, "atlas", "--Z", "7", "--p-grid", "0.1:0.9:9", "--W-grid", "0.1,0.5,1.0", "--out", str(tmp_path / name))
        assert (tmp_path / "a_cells.csv").read_bytes() == (tmp_path / "b_cells.csv").read_bytes()
        assert (tmp_path / "a_curves.csv").read_bytes() == (tmp_path / "b_curves.csv").read_bytes()

    @pytest.mark.parametrize("grid", [["--p-grid", "0.1:0.9:0"], ["--W-grid", ""], ["--p-grid", "0.1:x:3"]])
    def test_bad_grid(self, capsys, tmp_path, grid):
        assert main(["atlas", "--Z", "5", "--out", str(tmp_path / "x"), *grid]) == 2

    def test_unwritable(self, capsys, tmp_path):
        assert main(["atlas", "--Z", "3", "--p-grid", "0.5", "--W-grid", "0.1", "--out", str(tmp_path / "no" / "dir" / "x")]) == 2


class TestConjecture:
    def test_single_school(self, capsys):
        code, out, _ = run(capsys, "conjecture", "--Z", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "Z,i,j,p_ij,margin,status"
        line = next(l for l in lines if l.startswith("5,2,3,"))
        assert line.endswith(",OK")
        assert lines[-1] == "# status: VIOLATION-FREE"

    def test_report_file(self, capsys, tmp_path):
        out_file = tmp_path / "report.csv"
        code, out, _ = run(capsys, "conjecture", "--Z", "5..12", "--out", str(out_file))
        assert code == 0 and "status: VIOLATION-FREE" in out
        assert out_file.read_text().splitlines()[-1] == "# status: VIOLATION-FREE"

    def test_inverted_range(self, capsys):
        assert main(["conjecture", "--Z", "9..5"]) == 2


class TestMultitype:
    def test_example(self, capsys):
        code, out, _ = run(capsys, "multitype", "--probs", "0.8,0.5", "--counts", "3,3", "--W", "0.51")
        assert code == 0
        assert "profit: 1.050000" in out and "mixed classes: 1" in out and "forest: yes" in out

    def test_single_type_matches_solve(self, capsys):
        _, multi, _ = run(capsys, "multitype", "--probs", "0.77", "--counts", "5", "--W", "1.2", "--format", "json")
        _, single, _ = run(capsys, "solve", "--Z", "5", "--p", "0.77", "--W", "1.2", "--format", "json")
        multi, single = json.loads(multi), json.loads(single)
        assert multi["class_sizes"] == single["sizes"] and multi["profit"] == single["profit"]

    def test_over_cap(self, capsys):
        assert main(["multitype", "--probs", "0.8,0.5", "--counts", "9,9", "--W", "0.5"]) == 3


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "classsize.cli", "solve", "--Z", "5", "--p", "0.77", "--W", "1.2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "sizes: 2,3" in proc.stdout


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)
