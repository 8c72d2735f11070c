"""Command-line front end: ``classsize {solve,atlas,conjecture,multitype,verify}``.

Options may also come from a ``key=value`` config file (``--config``); flags
given on the command line override it.  Exit codes: 0 success, 2 usage error,
3 capacity error, 4 invariant failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import multitype, regions, solver, suites
from .core import Instance, SolveResult
from .errors import CapacityError, InvalidArgument

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_INVARIANT = 4


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return f"{x:.12g}"


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text: str | None) -> list[float] | None:
    """``a:b:n`` (n evenly spaced points, ends included) or a comma list."""
    if text is None:
        return None
    if ":" in text:
        try:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError as exc:
            raise UsageError(f"bad grid spec {text!r}; expected lo:hi:n") from exc
        if n < 1:
            return []
        if n == 1:
            return [lo]
        return [float(_num(lo + (hi - lo) * i / (n - 1))) for i in range(n)]
    return _floats(text)


def _range(text: str) -> list[int]:
    """``a..b`` inclusive, a single integer, or a comma list."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        if lo > hi:
            raise UsageError(f"inverted range {text!r}")
        return list(range(lo, hi + 1))
    return _ints(text)


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--format", choices=("text", "json"), default=None)
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(prog="classsize", description="Optimal class-size solver and region tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="optimal class sizes for one school")
    p.add_argument("--Z", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--W", type=float)
    p.add_argument("--V", type=float)
    p.add_argument("--cap", type=int, help="largest Z solved by full enumeration")

    p = sub.add_parser("atlas", parents=[common], help="classify a (p, W) grid and write CSV tables")
    p.add_argument("--Z", type=int)
    p.add_argument("--p-grid", help="lo:hi:n or comma list")
    p.add_argument("--W-grid", help="lo:hi:n or comma list")
    p.add_argument("--out", help="output prefix; writes PREFIX_cells.csv and PREFIX_curves.csv")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("conjecture", parents=[common], help="scan crossing-root orderings")
    p.add_argument("--Z", help="a..b, single value or comma list")
    p.add_argument("--out", help="report file (stdout when omitted)")

    p = sub.add_parser("multitype", parents=[common], help="optimal allocation of several student types")
    p.add_argument("--probs", help="comma list of per-type probabilities")
    p.add_argument("--counts", help="comma list of per-type student counts")
    p.add_argument("--W", type=float)
    p.add_argument("--V", type=float)
    p.add_argument("--z-cap", type=int)
    p.add_argument("--s-cap", type=int)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suites on reduced grids")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    opts = {}
    if args.config:
        try:
            opts.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for key, value in vars(args).items():
        if value is not None:
            opts[key] = value
    return opts


def _need(opts: dict, key: str, kind=str):
    if key not in opts:
        raise UsageError(f"missing required option --{key.replace('_', '-')}")
    try:
        return kind(opts[key])
    except ValueError as exc:
        raise UsageError(f"bad value for --{key}: {opts[key]!r}") from exc


def _emit(opts: dict, record: dict, text_lines: Sequence[str]) -> None:
    if opts.get("format", "text") == "json":
        print(json.dumps(record, sort_keys=True))
    else:
        print("\n".join(text_lines))


def cmd_solve(opts: dict) -> int:
    inst = Instance(_need(opts, "Z", int), _need(opts, "p", float), _need(opts, "W", float), float(opts.get("V", 1.0)))
    cap = int(opts.get("cap", solver.DEFAULT_CAP))
    fast = solver.solve_balanced(inst)
    oracle: SolveResult | None = solver.solve_bruteforce(inst, cap) if inst.Z <= cap else None
    result = oracle or fast
    agree = None if oracle is None else (oracle == fast)
    record = {
        "sizes": list(result.best),
        "m": result.m,
        "profit": float(_num(result.profit)),
        "profitable": result.profitable,
        "method": "enumeration" if oracle else "balanced",
        "balanced_agrees": agree,
    }
    lines = [
        f"sizes: {','.join(map(str, result.best))}",
        f"m: {result.m}",
        f"profit: {result.profit:.6f}",
        f"profitable: {'yes' if result.profitable else 'no'}",
        f"method: {record['method']}",
    ]
    if agree is not None:
        lines.append(f"balanced solver agrees: {'yes' if agree else 'no'}")
    _emit(opts, record, lines)
    if agree is False and result.profitable:
        print("invariant failure: balanced solver disagrees with enumeration", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


def cmd_atlas(opts: dict) -> int:
    Z = _need(opts, "Z", int)
    p_grid = _grid(opts.get("p_grid"))
    W_grid = _grid(opts.get("W_grid"))
    if p_grid == [] or W_grid == []:
        raise UsageError("empty grid")
    atlas = regions.emit_atlas(Z, p_grid, W_grid, cap=int(opts.get("cap", solver.DEFAULT_CAP)))
    prefix = opts.get("out", f"atlas_Z{Z}")
    cells_path, curves_path = Path(f"{prefix}_cells.csv"), Path(f"{prefix}_curves.csv")
    try:
        cells_path.write_text(atlas.cells_csv())
        curves_path.write_text(atlas.curves_csv())
    except OSError as exc:
        raise UsageError(f"cannot write atlas: {exc}") from exc
    counts = atlas.label_counts()
    record = {"Z": Z, "cells": len(atlas.cells), "labels": counts, "files": [str(cells_path), str(curves_path)]}
    lines = [f"Z={Z}: {len(atlas.cells)} cells"]
    lines += [f"  label {k}: {v}" for k, v in counts.items()]
    lines.append(f"wrote {cells_path} and {curves_path}")
    _emit(opts, record, lines)
    return 0


def cmd_conjecture(opts: dict) -> int:
    Z_values = _range(str(_need(opts, "Z")))
    if not Z_values:
        raise UsageError("empty Z range")
    report = regions.conjecture_a_scan(Z_values)
    text = "\n".join(report.lines()) + "\n"
    out = opts.get("out")
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write report: {exc}") from exc
    record = {
        "status": report.status,
        "checks": len(report.checks),
        "violations": len(report.violations),
        "all_certified": report.all_certified,
    }
    if out or opts.get("format") == "json":
        _emit(opts, record, [f"status: {report.status}", f"checks: {len(report.checks)}", f"violations: {len(report.violations)}"])
    else:
        sys.stdout.write(text)
    return 0


def cmd_multitype(opts: dict) -> int:
    inst = multitype.MultiTypeInstance(
        tuple(_floats(str(_need(opts, "probs")))),
        tuple(_ints(str(_need(opts, "counts")))),
        _need(opts, "W", float),
        float(opts.get("V", 1.0)),
    )
    alloc, profit = multitype.solve_multitype_bruteforce(
        inst,
        z_cap=int(opts.get("z_cap", multitype.DEFAULT_Z_CAP)),
        s_cap=int(opts.get("s_cap", multitype.DEFAULT_S_CAP)),
    )
    report = multitype.verify_structure(alloc, inst.s)
    record = {
        "rows": [list(r) for r in alloc.rows],
        "class_sizes": list(alloc.class_sizes),
        "profit": float(_num(profit)),
        "profitable": profit > 0,
        "mixed_classes": report.mixed,
        "forest": report.is_forest,
    }
    lines = [f"type {i + 1}: {','.join(map(str, r))}" for i, r in enumerate(alloc.rows)]
    lines += [
        f"class sizes: {','.join(map(str, alloc.class_sizes))}",
        f"profit: {profit:.6f}",
        f"mixed classes: {report.mixed}",
        f"forest: {'yes' if report.is_forest else 'no'}",
    ]
    _emit(opts, record, lines)
    if not report.passed:
        print("invariant failure: optimum violates the forest structure", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


def cmd_verify(opts: dict) -> int:
    results = suites.quick_suites(seed=int(opts.get("seed", 0)))
    record = {r.name: {"passed": r.passed, "checks": r.checked, "failures": len(r.failures)} for r in results}
    _emit(opts, record, [r.line() for r in results])
    return 0 if all(r.passed for r in results) else EXIT_INVARIANT


COMMANDS = {
    "solve": cmd_solve,
    "atlas": cmd_atlas,
    "conjecture": cmd_conjecture,
    "multitype": cmd_multitype,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        return COMMANDS[args.command](_merge(args))
    except (UsageError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
