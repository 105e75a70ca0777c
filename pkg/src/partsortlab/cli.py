"""Command-line entry point: ``partsortlab <command> ...``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fixtures
from .anova import anova_full_factorial, design_from_labels
from .distgen import NB_METHODS, Binomial, NegBinomial, UniformInt, generate_dataset
from .errors import ParameterError, PartsortError
from .harness import (CSV_HEADER, MEASURES, group_summaries, read_records, run_grid,
                      trend_report, write_plot_data)
from .plan import load_plan
from .rng import DEFAULT_SEED
from .sortcore import DeterministicSelect, RandomizedSelect, partition_sort, quicksort_baseline
from .statmodel import CANDIDATE_SETS, curve, select_model

MEASURE_FLAGS = {"time": "time", "comparisons": "comparisons", "both": "both"}
REPRO_TARGETS = ("table1", "table2", "table3", "anova", "all")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _write_csv(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def _read_keys(path: Path, binary: bool) -> np.ndarray:
    if binary:
        return np.fromfile(path, dtype="<i8").astype(np.int64)
    with open(path) as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=np.int64)


def _write_keys(keys: np.ndarray, out: Optional[Path], binary: bool) -> None:
    if binary:
        data = np.asarray(keys, dtype="<i8").tobytes()
        if out is None:
            sys.stdout.buffer.write(data)
        else:
            out.write_bytes(data)
        return
    text = "".join(f"{int(v)}\n" for v in keys)
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _require_file(path: Path) -> Path:
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _load_points(path: Path, y_name: str):
    """Points ``[(predictors, y)]`` from a bench CSV (cell means) or an n,k,p,y table."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), [])
    if header == CSV_HEADER:
        summaries = group_summaries(read_records(path))
        attr = "mean_time" if y_name == "time" else "mean_comparisons"
        return [({"n": s.n, "k": s.k or 0, "p": s.p or 0.0}, getattr(s, attr)) for s in summaries]
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParameterError(f"{path}: no data rows")
    ycol = header[-1]
    points = []
    for row in rows:
        pred = {a: float(row[a]) for a in ("n", "k", "p") if row.get(a) not in (None, "")}
        points.append((pred, float(row[ycol])))
    return points


def _varying_axis(points) -> str:
    varying = [a for a in ("n", "k", "p") if len({pt.get(a) for pt, _ in points}) > 1]
    if len(varying) != 1:
        raise ParameterError(f"cannot infer the sweep axis (varying: {varying or 'none'}); use --x")
    return varying[0]


def _fit_report(points, axis: str, title: str, out: Optional[Path], stem: str,
                paper_choice: Optional[str] = None):
    chosen, report = select_model(points, CANDIDATE_SETS[axis], title=title,
                                  paper_choice=paper_choice)
    print(report.to_text())
    if out is not None:
        _write_csv(out / f"{stem}_fits.csv", report.to_csv_rows())
        xs = [pt[axis] for pt, _ in points]
        fixed = {a: v for a, v in points[0][0].items() if a != axis}
        write_plot_data(out / f"{stem}_observed.dat", [(pt[axis], y) for pt, y in points])
        write_plot_data(out / f"{stem}_predicted.dat",
                        curve(report.chosen_fit, axis, min(xs), max(xs), fixed))
    return report


def _anova_inputs(path: Path, response: str, factors: Optional[list[str]]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, [])
        rows = [r for r in reader if r]
    if header == CSV_HEADER:
        records = read_records(path)
        attr = {"time": "elapsed_s", "comparisons": "comparisons"}[response]
        names = factors or [a for a in fixtures.ANOVA_FACTORS
                            if len({getattr(r, a) for r in records}) > 1]
        labels = [tuple(getattr(r, a) for a in names) for r in records]
        ys = [float(getattr(r, attr)) for r in records]
        return names, labels, ys, ("y" if response == "time" else "comparisons")
    names = header[:-1]
    if not names:
        raise ParameterError(f"{path}: long-format CSV needs factor columns and a response")
    labels = [tuple(_label(v) for v in r[:-1]) for r in rows]
    ys = [float(r[-1]) for r in rows]
    if factors:
        idx = [names.index(f) for f in factors]
        labels = [tuple(lab[i] for i in idx) for lab in labels]
        names = factors
    return names, labels, ys, header[-1]


def _label(text: str):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    if args.dist == "nb":
        spec = NegBinomial(args.k, args.p)
    elif args.dist == "binomial":
        spec = Binomial(args.m, args.p)
    else:
        spec = UniformInt(args.lo, args.hi)
    keys = generate_dataset(spec, args.n, args.seed, method=args.method)
    _write_keys(keys, args.out, args.binary)
    return 0


def cmd_sort(args) -> int:
    keys = _read_keys(_require_file(args.input), args.binary)
    if args.algorithm == "partition":
        strategy = DeterministicSelect() if args.strategy == "det" else RandomizedSelect(args.seed)
        out, stats = partition_sort(keys, strategy)
    else:
        out, stats = quicksort_baseline(keys, args.seed)
    if args.out is not None:
        _write_keys(out, args.out, args.binary)
    print(f"n={keys.size} comparisons={stats.comparisons} swaps={stats.swaps} "
          f"max_depth={stats.max_depth}", file=sys.stderr if args.out is None else sys.stdout)
    if args.out is None:
        _write_keys(out, None, args.binary)
    return 0


def cmd_bench(args) -> int:
    plan = load_plan(_require_file(args.plan))
    if args.trials is not None:
        plan.trials = args.trials
    if args.seed is not None:
        plan.master_seed = args.seed
    if args.measure is not None:
        plan.measure = args.measure
    if args.strategy is not None:
        plan.strategy = args.strategy
    if args.warmup is not None:
        plan.warmup = args.warmup
    plan.__post_init__()
    out = args.out or Path("bench-out")
    out.mkdir(parents=True, exist_ok=True)

    def progress(s):
        print(f"n={s.n} k={s.k} p={s.p} trials={s.trials} T={s.mean_time:.6f}s "
              f"comparisons={s.mean_comparisons:.1f}", flush=True)

    result = run_grid(plan, out / "trials.csv", jobs=args.jobs, progress=progress)
    print(f"wrote {result.csv_path} ({len(result.records)} rows) and {result.summary_path}")
    for axis in ("p", "k", "n"):
        values = {getattr(s, axis) for s in result.summaries}
        others = {tuple(getattr(s, a) for a in ("n", "k", "p") if a != axis)
                  for s in result.summaries}
        if len(values) > 1 and len(others) == 1:
            key = (lambda s, a=axis: getattr(s, a))
            ordered = sorted(result.summaries, key=key)
            write_plot_data(out / f"time_vs_{axis}.dat",
                            [(getattr(s, axis), s.mean_time) for s in ordered])
            write_plot_data(out / f"comparisons_vs_{axis}.dat",
                            [(getattr(s, axis), s.mean_comparisons) for s in ordered])
            if axis == "p":
                print(trend_report(result.summaries, "p").to_text())
    return 0


def cmd_fit(args) -> int:
    points = _load_points(_require_file(args.data), args.y)
    axis = args.x or _varying_axis(points)
    points = [({**pt, axis: pt.get(axis, 0.0)}, y) for pt, y in points]
    distinct = len({pt[axis] for pt, _ in points})
    candidates = [c for c in CANDIDATE_SETS[args.candidates or axis] if len(c) <= distinct]
    if not candidates:
        raise ParameterError(f"only {distinct} distinct {axis} values; nothing can be fitted")
    chosen, report = select_model(points, candidates, title=f"fit of {args.data}")
    print(report.to_text())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_csv(args.out / "fits.csv", report.to_csv_rows())
        xs = [pt[axis] for pt, _ in points]
        fixed = {a: v for a, v in points[0][0].items() if a != axis}
        write_plot_data(args.out / "observed.dat", sorted((pt[axis], y) for pt, y in points))
        write_plot_data(args.out / "predicted.dat",
                        curve(report.chosen_fit, axis, min(xs), max(xs), fixed))
    return 0


def cmd_anova(args) -> int:
    factors = args.factors.split(",") if args.factors else None
    names, labels, ys, response = _anova_inputs(_require_file(args.data), args.response, factors)
    design, obs = design_from_labels(names, labels, ys)
    table = anova_full_factorial(design, obs, response=response)
    print(table.to_text())
    if args.out is not None:
        _write_csv(args.out / "anova.csv", table.to_csv_rows())
    return 0


def repro(target: str, out: Optional[Path] = None) -> int:
    targets = ("table1", "table2", "table3", "anova") if target == "all" else (target,)
    for t in targets:
        if t == "anova":
            design, obs = fixtures.table4_design(replicates=3)
            table = anova_full_factorial(design, obs)
            print("Table 4 cell means, replicated x3")
            print(table.to_text())
            if out is not None:
                _write_csv(out / "anova.csv", table.to_csv_rows())
        else:
            points = fixtures.table_points(t)
            axis = fixtures.SWEEP_AXIS[t]
            _fit_report(points, axis, f"{t}: mean time vs {axis}", out, t,
                        paper_choice=fixtures.PUBLISHED_CHOICE[t])
        print()
    return 0


def cmd_repro(args) -> int:
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    return repro(args.target, args.out)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partsortlab",
                                     description="Partition Sort performance laboratory")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("gen", help="generate keys, one per line (or binary int64 LE)")
    p.add_argument("--dist", choices=("nb", "binomial", "uniform"), default="nb")
    p.add_argument("--k", type=int, default=1000, help="NB successes")
    p.add_argument("--m", type=int, default=1000, help="binomial trials")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=1_000_000)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--method", choices=NB_METHODS, default="geometric")
    p.add_argument("--binary", action="store_true", help="little-endian signed 64-bit output")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sort", help="sort a key file and report counters")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--algorithm", choices=("partition", "quick"), default="partition")
    p.add_argument("--strategy", choices=("det", "rand"), default="det")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("bench", help="run an experiment plan")
    p.add_argument("plan", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--measure", choices=tuple(MEASURE_FLAGS))
    p.add_argument("--strategy", choices=("det", "rand"))
    p.add_argument("--warmup", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fit", help="fit empirical-O candidate models")
    p.add_argument("data", type=Path)
    p.add_argument("--x", choices=("n", "k", "p"))
    p.add_argument("--y", choices=("time", "comparisons"), default="time")
    p.add_argument("--candidates", choices=tuple(CANDIDATE_SETS))
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("anova", help="full-factorial ANOVA of a bench or long-format CSV")
    p.add_argument("data", type=Path)
    p.add_argument("--response", choices=("time", "comparisons"), default="time")
    p.add_argument("--factors", help="comma-separated factor order, e.g. n,p,k")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("repro", help="re-analyse the published tables (no benchmarking)")
    p.add_argument("target", choices=REPRO_TARGETS)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"partsortlab: error: {exc}", file=sys.stderr)
        return 2
    except (PartsortError, OSError, ValueError, KeyError) as exc:
        print(f"partsortlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
