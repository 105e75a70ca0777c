"""Timed and counted sorting experiments over (n, k, p) grids.

Every trial sorts a freshly generated dataset whose seed is
``derive_seed(master_seed, cell_index, trial)``; with ``reuse_dataset`` all
trials of a cell re-sort copies of the trial-0 dataset.  Only the sort call
sits between the two monotonic clock reads.
"""
from __future__ import annotations

import csv
import itertools
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .distgen import GEOMETRIC_SUM, Binomial, DistributionSpec, NegBinomial, UniformInt, generate_dataset
from .errors import MeasurementError, MissingCellError, ParameterError, PartsortError
from .rng import DEFAULT_SEED, derive_seed
from .sortcore import DeterministicSelect, RandomizedSelect, partition_sort, quicksort_baseline

CSV_HEADER = ["n", "k", "p", "trial", "seed", "elapsed_s", "comparisons", "swaps"]
SUMMARY_HEADER = ["n", "k", "p", "trials", "mean_time", "sd_time", "mean_comparisons",
                  "mean_swaps"]
MEASURES = ("time", "comparisons", "both")
DEFAULT_TRIALS = 100


@dataclass(frozen=True)
class TrialRecord:
    n: int
    k: Optional[int]
    p: Optional[float]
    trial: int
    seed: int
    elapsed_ns: int
    comparisons: int
    swaps: int

    @property
    def elapsed_s(self) -> float:
        return self.elapsed_ns / 1e9

    @property
    def cell(self) -> tuple:
        return (self.n, self.k, self.p)

    def csv_row(self) -> list[str]:
        ns = self.elapsed_ns
        return [str(self.n), _opt(self.k), _opt(self.p), str(self.trial), str(self.seed),
                f"{ns // 10**9}.{ns % 10**9:09d}", str(self.comparisons), str(self.swaps)]


@dataclass(frozen=True)
class CellSummary:
    n: int
    k: Optional[int]
    p: Optional[float]
    trials: int
    mean_time: float
    sd_time: float
    mean_comparisons: float
    mean_swaps: float

    @property
    def cell(self) -> tuple:
        return (self.n, self.k, self.p)

    def csv_row(self) -> list[str]:
        return [str(self.n), _opt(self.k), _opt(self.p), str(self.trials), repr(self.mean_time),
                repr(self.sd_time), repr(self.mean_comparisons), repr(self.mean_swaps)]


def _opt(v) -> str:
    return "" if v is None else (repr(v) if isinstance(v, float) else str(v))


def spec_columns(spec: DistributionSpec) -> tuple[Optional[int], Optional[float]]:
    """Values written to the ``k`` and ``p`` columns for ``spec``."""
    if isinstance(spec, NegBinomial):
        return spec.k, spec.p
    if isinstance(spec, Binomial):
        return spec.m, spec.p
    return None, None


def summarize_records(records: Sequence[TrialRecord]) -> CellSummary:
    if not records:
        raise ParameterError("cannot summarise an empty record set")
    cells = {r.cell for r in records}
    if len(cells) != 1:
        raise ParameterError(f"records span several cells: {sorted(cells, key=str)}")
    times = [r.elapsed_s for r in records]
    m = len(records)
    return CellSummary(
        n=records[0].n, k=records[0].k, p=records[0].p, trials=m,
        mean_time=math.fsum(times) / m,
        sd_time=statistics.stdev(times) if m > 1 else 0.0,
        mean_comparisons=math.fsum(r.comparisons for r in records) / m,
        mean_swaps=math.fsum(r.swaps for r in records) / m,
    )


# ---------------------------------------------------------------- running


def make_sorter(algorithm: str = "partition", strategy: str = "det", seed: int = 0) -> Callable:
    if strategy not in ("det", "rand"):
        raise ParameterError(f"unknown strategy {strategy!r}")
    if algorithm == "partition":
        strat = DeterministicSelect() if strategy == "det" else RandomizedSelect(seed)
        return lambda keys: partition_sort(keys, strat)
    if algorithm == "quick":
        return lambda keys: quicksort_baseline(keys, seed)
    raise ParameterError(f"unknown algorithm {algorithm!r}")


_primed = False


def _prime() -> None:
    # compile the built-in kernels outside any timed region
    global _primed
    if not _primed:
        tiny = np.array([3, 1, 2, 2, 9, 0, 4], dtype=np.int64)
        partition_sort(tiny, DeterministicSelect())
        partition_sort(tiny, RandomizedSelect(0))
        quicksort_baseline(tiny)
        _primed = True


def run_cell(n: int, spec: DistributionSpec, trials: int = DEFAULT_TRIALS,
             master_seed: int = DEFAULT_SEED, measure: str = "both", *,
             cell_index: int = 0, sorter: Optional[Callable] = None, warmup: int = 0,
             reuse_dataset: bool = False, method: str = GEOMETRIC_SUM,
             generator: Optional[Callable] = None,
             clock: Callable[[], int] = time.perf_counter_ns,
             ) -> tuple[CellSummary, list[TrialRecord]]:
    """Run ``trials`` timed sorts of ``n`` keys drawn from ``spec``.

    ``generator(spec, n, seed)`` and ``sorter(keys) -> (sorted, stats)`` can
    be swapped out; ``clock`` must return integer nanoseconds.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if measure not in MEASURES:
        raise ParameterError(f"measure must be one of {MEASURES}, got {measure!r}")
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    sorter = sorter or make_sorter()
    if generator is None:
        def generator(s, size, seed):
            return generate_dataset(s, size, seed, method=method)
    _prime()

    k, p = spec_columns(spec)
    shared = None
    if reuse_dataset:
        shared_seed = derive_seed(master_seed, cell_index, 0)
        shared = generator(spec, n, shared_seed)

    if warmup and measure != "comparisons":
        warm = shared if shared is not None else generator(spec, n, derive_seed(master_seed, cell_index, -1))
        for _ in range(warmup):
            sorter(warm)

    records = []
    for t in range(trials):
        if shared is not None:
            seed, keys = shared_seed, shared
        else:
            seed = derive_seed(master_seed, cell_index, t)
            keys = generator(spec, n, seed)
        start = clock()
        _, stats = sorter(keys)
        stop = clock()
        if stop < start:
            raise MeasurementError(f"clock went backwards ({start} -> {stop})")
        records.append(TrialRecord(n, k, p, t, seed, int(stop - start),
                                   int(stats.comparisons), int(stats.swaps)))
    return summarize_records(records), records


@dataclass
class ExperimentPlan:
    n_levels: list[int]
    dist_grid: list[DistributionSpec]
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_SEED
    measure: str = "both"
    algorithm: str = "partition"
    strategy: str = "det"
    warmup: int = 0
    reuse_dataset: bool = False
    method: str = GEOMETRIC_SUM

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.measure not in MEASURES:
            raise ParameterError(f"measure must be one of {MEASURES}")
        if not self.n_levels or not self.dist_grid:
            raise ParameterError("plan needs at least one n level and one distribution")
        if any(n < 0 for n in self.n_levels):
            raise ParameterError("n levels must be >= 0")
        if self.warmup < 0:
            raise ParameterError("warmup must be >= 0")

    def cells(self) -> list[tuple[int, int, DistributionSpec]]:
        """``(cell_index, n, spec)`` with n varying slowest."""
        pairs = itertools.product(self.n_levels, self.dist_grid)
        return [(i, n, spec) for i, (n, spec) in enumerate(pairs)]


@dataclass
class GridResult:
    records: list[TrialRecord]
    summaries: list[CellSummary]
    csv_path: Optional[Path] = None
    summary_path: Optional[Path] = None


def _run_plan_cell(plan: ExperimentPlan, index: int, n: int, spec: DistributionSpec):
    sorter = make_sorter(plan.algorithm, plan.strategy, derive_seed(plan.master_seed, index))
    return run_cell(n, spec, plan.trials, plan.master_seed, plan.measure, cell_index=index,
                    sorter=sorter, warmup=plan.warmup, reuse_dataset=plan.reuse_dataset,
                    method=plan.method)


def run_grid(plan: ExperimentPlan, out_csv: Optional[os.PathLike] = None, *,
             jobs: int = 1, progress: Optional[Callable[[CellSummary], None]] = None) -> GridResult:
    """Run every cell of ``plan``; stream trial rows to ``out_csv`` if given.

    Rows go to ``<out_csv>.partial`` while running and the file is renamed on
    success.  Parallel execution (``jobs > 1``) is refused unless the plan
    measures comparisons only, since concurrent sorts skew wall times.
    """
    if jobs > 1 and plan.measure != "comparisons":
        raise ParameterError("parallel runs are only allowed with measure=comparisons")
    cells = plan.cells()
    out_csv = Path(out_csv) if out_csv is not None else None
    partial = out_csv.with_name(out_csv.name + ".partial") if out_csv else None
    records: list[TrialRecord] = []
    summaries: list[CellSummary] = []

    sink = None
    try:
        if partial is not None:
            partial.parent.mkdir(parents=True, exist_ok=True)
            sink = open(partial, "w", newline="")
            writer = csv.writer(sink, lineterminator="\n")
            writer.writerow(CSV_HEADER)
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = pool.map(_run_plan_cell, itertools.repeat(plan), *zip(*cells))
                for summary, recs in results:
                    _emit(summary, recs, records, summaries, sink, progress)
        else:
            for index, n, spec in cells:
                summary, recs = _run_plan_cell(plan, index, n, spec)
                _emit(summary, recs, records, summaries, sink, progress)
    except OSError as exc:
        raise PartsortError(f"failed writing results ({exc}); partial results in {partial}") from exc
    finally:
        if sink is not None:
            sink.close()

    result = GridResult(records, summaries)
    if out_csv is not None:
        os.replace(partial, out_csv)
        result.csv_path = out_csv
        result.summary_path = out_csv.with_name("summary.csv")
        write_summaries(result.summary_path, summaries)
    return result


def _emit(summary, recs, records, summaries, sink, progress):
    records.extend(recs)
    summaries.append(summary)
    if sink is not None:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerows(r.csv_row() for r in recs)
        sink.flush()
    if progress is not None:
        progress(summary)


# ---------------------------------------------------------------- persistence


def write_records(path: os.PathLike, records: Iterable[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(r.csv_row() for r in records)


def _parse_elapsed(text: str) -> int:
    whole, _, frac = text.partition(".")
    return int(whole) * 10**9 + int((frac + "000000000")[:9])


def read_records(path: os.PathLike) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ParameterError(f"{path}: expected header {','.join(CSV_HEADER)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                n, k, p, trial, seed, elapsed, comps, swaps = row
                out.append(TrialRecord(int(n), int(k) if k else None, float(p) if p else None,
                                       int(trial), int(seed), _parse_elapsed(elapsed),
                                       int(comps), int(swaps)))
            except ValueError as exc:
                raise ParameterError(f"{path}:{lineno}: bad record ({exc})") from None
        return out


def write_summaries(path: os.PathLike, summaries: Iterable[CellSummary]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        writer.writerows(s.csv_row() for s in summaries)


def group_summaries(records: Iterable[TrialRecord]) -> list[CellSummary]:
    """One summary per distinct (n, k, p), in first-seen order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault(r.cell, []).append(r)
    return [summarize_records(g) for g in groups.values()]


def write_plot_data(path: os.PathLike, pairs: Iterable[tuple[float, float]]) -> None:
    with open(path, "w") as fh:
        for x, y in pairs:
            fh.write(f"{x!r} {y!r}\n")


# ---------------------------------------------------------------- tables


AXES = ("n", "k", "p")


@dataclass
class MeanTable:
    row_axis: str
    col_axis: str
    panel_axis: Optional[str]
    rows: list
    cols: list
    panels: dict = field(default_factory=dict)

    def to_text(self, digits: int = 5) -> str:
        out = []
        for panel, grid in self.panels.items():
            if self.panel_axis is not None:
                out.append(f"{self.panel_axis.upper()}={_fmt_level(panel)}")
            out.append("\t".join([self.row_axis.upper()]
                                 + [f"{self.col_axis}={_fmt_level(c)}" for c in self.cols]))
            for r, line in zip(self.rows, grid):
                out.append("\t".join([_fmt_level(r)] + [f"{v:.{digits}g}" for v in line]))
        return "\n".join(out)


def _fmt_level(v) -> str:
    return f"{v:g}" if isinstance(v, float) else str(v)


def summarize_table(records: Sequence, row_axis: str, col_axis: str,
                    panel_axis: Optional[str] = None, value: str = "elapsed_s") -> MeanTable:
    """Mean of ``value`` per (row, col[, panel]) level combination.

    ``records`` need attributes ``n``, ``k``, ``p`` and ``value``.  Every
    combination of observed levels must be present, otherwise a
    MissingCellError lists the absent ``(n, k, p)`` cells.
    """
    axes = [row_axis, col_axis] + ([panel_axis] if panel_axis else [])
    for a in axes:
        if a not in AXES:
            raise ParameterError(f"unknown axis {a!r}; expected one of {AXES}")
    if len(set(axes)) != len(axes):
        raise ParameterError("table axes must be distinct")
    if not records:
        raise ParameterError("no records to tabulate")

    levels = {a: sorted({getattr(r, a) for r in records}) for a in axes}
    sums: dict[tuple, list[float]] = {}
    for r in records:
        sums.setdefault(tuple(getattr(r, a) for a in axes), []).append(float(getattr(r, value)))

    missing = []
    for combo in itertools.product(*(levels[a] for a in axes)):
        if combo not in sums:
            cell = dict(zip(axes, combo))
            missing.append(tuple(cell.get(a) for a in AXES))
    if missing:
        raise MissingCellError(missing)

    panels = {}
    for panel in (levels[panel_axis] if panel_axis else [None]):
        grid = []
        for rv in levels[row_axis]:
            line = []
            for cv in levels[col_axis]:
                key = (rv, cv) + ((panel,) if panel_axis else ())
                vals = sums[key]
                line.append(math.fsum(vals) / len(vals))
            grid.append(line)
        panels[panel] = grid
    return MeanTable(row_axis, col_axis, panel_axis, levels[row_axis], levels[col_axis], panels)


# ---------------------------------------------------------------- trends


@dataclass
class TrendReport:
    axis: str
    levels: list
    mean_time: list
    mean_comparisons: list

    @staticmethod
    def _decreasing(values) -> bool:
        return all(b < a for a, b in zip(values, values[1:]))

    @property
    def time_decreasing(self) -> bool:
        return self._decreasing(self.mean_time)

    @property
    def comparisons_decreasing(self) -> bool:
        return self._decreasing(self.mean_comparisons)

    def to_text(self) -> str:
        lines = [f"{self.axis:>8}{'mean time (s)':>18}{'mean comparisons':>20}"]
        for lv, t, c in zip(self.levels, self.mean_time, self.mean_comparisons):
            lines.append(f"{_fmt_level(lv):>8}{t:>18.9f}{c:>20.1f}")
        for label, ok in (("mean time", self.time_decreasing),
                          ("mean comparisons", self.comparisons_decreasing)):
            verdict = "decreases monotonically" if ok else "does NOT decrease monotonically (diverges)"
            lines.append(f"{label} {verdict} in {self.axis}")
        return "\n".join(lines)


def trend_report(summaries: Sequence[CellSummary], axis: str = "p") -> TrendReport:
    if axis not in AXES:
        raise ParameterError(f"unknown axis {axis!r}")
    ordered = sorted(summaries, key=lambda s: getattr(s, axis))
    return TrendReport(axis, [getattr(s, axis) for s in ordered],
                       [s.mean_time for s in ordered], [s.mean_comparisons for s in ordered])
