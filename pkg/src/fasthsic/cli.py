"""Command-line front end.

    fasthsic test --x X.csv --y Y.csv [--method new|gamma|perm] ...
    fasthsic simulate --spec study.json [--runs N] [--seed S] ...

Exit codes: 0 success, 2 input error, 3 statistical degeneracy,
4 numerical failure. The number of worker threads/processes is capped by
the ``FASTHSIC_MAX_THREADS`` environment variable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import List, Optional

import numpy as np

from .errors import DegeneracyError, HSICError, InputError, NumericalError
from .kernel import KernelConfig, Sample
from .pipeline import hsic_test
from .simulate import THREADS_ENV, StudyReport, run_study, scenario_from_dict

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_NUMERIC = 0, 2, 3, 4

STUDY_COLUMNS = [
    "design", "model", "n", "p", "rho", "delta", "f", "m", "k",
    "method", "runs", "rejections", "empirical_rate", "are",
]


def load_sample(path: str, kind: str = "vector", grid_source: str = "first-row",
                header: bool = False) -> Sample:
    """Read a rectangular numeric CSV; rows are observations."""
    try:
        with open(path, newline="") as fh:
            lines = list(csv.reader(fh))
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None

    rows = []
    width = None
    for lineno, cells in enumerate(lines, start=1):
        if header and lineno == 1:
            continue
        if not cells or all(not c.strip() for c in cells):
            continue
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise InputError(f"{path}:{lineno}: expected {width} columns, found {len(cells)}")
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise InputError(f"{path}:{lineno}:{col}: not a number: {cell!r}") from None
        rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data")

    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        r, c = np.argwhere(~np.isfinite(data))[0]
        raise InputError(f"{path}: non-finite value in data row {r + 1}, column {c + 1}")
    if kind == "vector":
        return Sample.vector(data)
    if kind != "functional":
        raise InputError(f"unknown sample kind {kind!r}")
    if grid_source == "first-row":
        if data.shape[0] < 2:
            raise InputError(f"{path}: need a grid row and at least one curve")
        grid, data = data[0], data[1:]
        bad = np.flatnonzero(np.diff(grid) <= 0)
        if bad.size:
            raise InputError(
                f"{path}: grid row is not strictly increasing at column {bad[0] + 2}"
            )
    elif grid_source in ("uniform", "uniform-unit"):
        grid = None
    else:
        raise InputError(f"unknown grid source {grid_source!r}")
    return Sample.functional(data, grid)


def _width(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"width must be 'auto' or a number, got {text!r}")
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"width must be positive, got {text!r}")
    return value


def _alpha(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _threads(requested: int) -> int:
    n = requested if requested > 0 else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasthsic",
        description="HSIC independence tests and Monte Carlo size/power studies.",
        epilog=f"Set {THREADS_ENV} to cap worker threads. Exit codes: 0 ok, 2 input "
        "error, 3 statistical degeneracy, 4 numerical failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test independence of two paired CSV samples")
    t.add_argument("--x", required=True, help="CSV file of x observations (one per row)")
    t.add_argument("--y", required=True, help="CSV file of y observations (one per row)")
    t.add_argument("--method", choices=["new", "gamma", "perm"], default="new",
                   help="null approximation: three-cumulant chi-square (new), Gamma, "
                   "or permutation (default: new)")
    t.add_argument("--kind", choices=["vector", "functional"], default="vector",
                   help="observations are vectors or curves on a shared grid")
    t.add_argument("--grid", choices=["first-row", "uniform"], default="first-row",
                   help="functional data: read the time grid from the first row, or use "
                   "the uniform grid on [0, 1]")
    t.add_argument("--header", action="store_true", help="skip the first line of each CSV")
    t.add_argument("--width-x", type=_width, default="auto",
                   help="kernel width sigma^2 for x, or 'auto' for the median heuristic")
    t.add_argument("--width-y", type=_width, default="auto",
                   help="kernel width sigma^2 for y, or 'auto' for the median heuristic")
    t.add_argument("--perms", type=_positive_int, default=200,
                   help="number of permutations for --method perm (default: 200)")
    t.add_argument("--seed", type=_seed, default=0, help="permutation seed (default: 0)")
    t.add_argument("--alpha", type=_alpha, default=0.05,
                   help="nominal level for the reject flag (default: 0.05)")
    t.add_argument("--threads", type=int, default=1,
                   help="threads for permutations; 0 = one per CPU (default: 1)")
    t.add_argument("--format", choices=["json", "csv", "text"], default="json",
                   help="output format (default: json)")

    s = sub.add_parser("simulate", help="run a Monte Carlo size/power study")
    s.add_argument("--spec", required=True, help="JSON study specification")
    s.add_argument("--runs", type=_positive_int, help="runs per scenario (overrides the study file)")
    s.add_argument("--seed", type=_seed, help="master seed (overrides the study file)")
    s.add_argument("--threads", type=int, default=1,
                   help="worker processes; 0 = one per CPU (default: 1)")
    s.add_argument("--format", choices=["json", "csv"], default="json",
                   help="output format (default: json)")
    return parser


# -- test ---------------------------------------------------------------------


def run_test(args) -> str:
    x = load_sample(args.x, args.kind, args.grid, args.header)
    y = load_sample(args.y, args.kind, args.grid, args.header)
    if x.n != y.n:
        raise InputError(f"samples are not paired: {x.n} rows in x, {y.n} rows in y")
    result = hsic_test(
        x, y, args.method,
        kernel_x=KernelConfig(args.width_x),
        kernel_y=KernelConfig(args.width_y),
        perms=args.perms, seed=args.seed, threads=_threads(args.threads),
    )
    out = result.to_dict()
    out["alpha"] = args.alpha
    out["reject"] = result.p_value <= args.alpha

    if args.format == "json":
        return json.dumps(out, sort_keys=True, indent=2) + "\n"
    if args.format == "csv":
        flat = {k: v for k, v in out.items() if k != "detail"}
        for k, v in out["detail"].items():
            flat[f"detail.{k}"] = json.dumps(v) if isinstance(v, list) else v
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
        return buf.getvalue()
    lines = [
        f"method:        {out['method']}",
        f"n:             {out['n']}",
        f"statistic:     {out['statistic']:.6g}",
        f"HSIC estimate: {out['hsic_estimate']:.6g}",
        f"p-value:       {out['p_value']:.6g}",
        f"sigma2 x / y:  {out['sigma2_x']:.6g} / {out['sigma2_y']:.6g}",
        f"reject at {args.alpha:g}: {'yes' if out['reject'] else 'no'}",
    ]
    for k, v in out["detail"].items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        elif isinstance(v, list):
            v = ", ".join(f"{e:.6g}" for e in v)
        lines.append(f"  {k}: {v}")
    return "\n".join(lines) + "\n"


# -- simulate -----------------------------------------------------------------


def load_study(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(spec, dict) or not isinstance(spec.get("scenarios"), list):
        raise InputError(f"{path}: expected an object with a 'scenarios' list")
    unknown = set(spec) - {"scenarios", "method", "methods", "runs", "alpha", "seed", "perms"}
    if unknown:
        raise InputError(f"{path}: unknown keys {sorted(unknown)}")
    for sc in spec["scenarios"]:
        if not isinstance(sc, dict):
            raise InputError(f"{path}: each scenario must be an object")
    return spec


def study_rows(report: StudyReport) -> List[dict]:
    rows = []
    for rec in report.records:
        row = {c: "" for c in STUDY_COLUMNS}
        row.update({k: v for k, v in rec.scenario.items() if k in row})
        row.update(method=rec.method, runs=rec.runs, rejections=rec.rejections,
                   empirical_rate=rec.empirical_rate)
        if report.are is not None:
            row["are"] = report.are[rec.method]
        rows.append(row)
    return rows


def run_simulate(args) -> str:
    spec = load_study(args.spec)
    scenarios = [scenario_from_dict(sc) for sc in spec["scenarios"]]
    methods = spec.get("methods", spec.get("method", "new"))
    runs = args.runs if args.runs is not None else spec.get("runs", 2000)
    seed = args.seed if args.seed is not None else spec.get("seed", 0)
    try:
        runs, seed, perms = int(runs), int(seed), int(spec.get("perms", 200))
        alpha = float(spec.get("alpha", 0.05))
    except (TypeError, ValueError) as e:
        raise InputError(f"{args.spec}: {e}") from None
    report = run_study(scenarios, methods, runs, alpha, seed, _threads(args.threads), perms)

    if args.format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=STUDY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(study_rows(report))
    return buf.getvalue()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = run_test(args) if args.command == "test" else run_simulate(args)
    except InputError as e:
        print(f"fasthsic: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except DegeneracyError as e:
        print(f"fasthsic: degenerate: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (NumericalError, HSICError, FloatingPointError) as e:
        print(f"fasthsic: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
