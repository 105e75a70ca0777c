"""Balanced full-factorial ANOVA (fixed effects, all interactions).

Sums of squares come from centered cell and marginal means: the effect of a
factor set S is the inclusion-exclusion combination of the marginal means of
every subset of S, and SS(S) is the replicate-weighted sum of its squares.
In a balanced design the sequential and adjusted sums of squares coincide,
so both columns carry the same value.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BalanceError, ParameterError
from .fdist import f_pvalue

UNDEFINED = "*"


@dataclass(frozen=True)
class Factor:
    name: str
    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) < 1:
            raise ParameterError(f"factor {self.name!r} has no levels")


@dataclass(frozen=True)
class FactorialDesign:
    factors: tuple[Factor, ...]
    replicates: int

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ParameterError("a design needs at least one factor")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ParameterError(f"duplicate factor names: {names}")
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(f.levels) for f in self.factors)

    @property
    def total_runs(self) -> int:
        return int(np.prod(self.shape)) * self.replicates

    def sources(self) -> list[tuple[int, ...]]:
        """Every non-empty factor subset: mains first, then 2-way, and so on."""
        idx = range(len(self.factors))
        return [c for size in idx for c in itertools.combinations(idx, size + 1)]

    def source_name(self, axes: Sequence[int]) -> str:
        return "*".join(self.factors[i].name for i in axes)

    def label(self, cell: Sequence[int]) -> tuple:
        return tuple(f.levels[i] for f, i in zip(self.factors, cell))


@dataclass(frozen=True)
class Observation:
    levels: tuple[int, ...]
    y: float


@dataclass
class AnovaRow:
    source: str
    df: int
    seq_ss: float
    adj_ss: float
    adj_ms: Optional[float]
    f: Optional[float] = None
    p: Optional[float] = None


@dataclass
class AnovaTable:
    design: FactorialDesign
    rows: list[AnovaRow]
    s: Optional[float]
    r_sq: float
    r_sq_adj: Optional[float]
    response: str = "y"

    def row(self, source: str) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    @property
    def effects(self) -> list[AnovaRow]:
        return [r for r in self.rows if r.source not in ("Error", "Total")]

    def to_text(self) -> str:
        d = self.design
        names = ", ".join(f.name for f in d.factors)
        out = [
            "Multilevel Factorial Design",
            "",
            f"Factors: {len(d.factors)}  Replicates: {d.replicates}",
            f"Base runs: {d.total_runs // d.replicates}  Total runs: {d.total_runs}",
            f"Number of levels: {', '.join(str(n) for n in d.shape)}",
            "",
            f"General Linear Model: {self.response} versus {names}",
            "",
            f"{'Factor':<8}{'Type':<7}{'Levels':>6}  Values",
        ]
        for f in d.factors:
            out.append(f"{f.name:<8}{'fixed':<7}{len(f.levels):>6}  "
                       + ", ".join(_fmt_level(v) for v in f.levels))
        out += ["", f"Analysis of Variance for {self.response}, using Adjusted SS for Tests", ""]
        big = max(abs(r.seq_ss) for r in self.rows) >= 1e3
        num = "{:.7g}" if big else "{:.7f}"
        cells = [["Source", "DF", "Seq SS", "Adj SS", "Adj MS", "F", "P"]]
        for r in self.rows:
            total = r.source == "Total"
            tested = r.source not in ("Error", "Total")
            cells.append([
                r.source, str(r.df), num.format(r.seq_ss),
                "" if total else num.format(r.adj_ss),
                "" if total else _fmt_num(r.adj_ms, num),
                _fmt_f(r.f) if tested else "",
                _fmt_num(r.p, "{:.3f}") if tested else "",
            ])
        widths = [max(len(c[i]) for c in cells) for i in range(7)]
        for c in cells:
            line = c[0].ljust(widths[0]) + "".join(v.rjust(w + 2) for v, w in zip(c[1:], widths[1:]))
            out.append(line.rstrip())
        out += ["", f"S = {_fmt_num(self.s, '{:.6g}')}   R-Sq = {_pct(self.r_sq)}   "
                    f"R-Sq(adj) = {_pct(self.r_sq_adj)}"]
        return "\n".join(out)

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["source", "df", "seq_ss", "adj_ss", "adj_ms", "f", "p"]]
        for r in self.rows:
            rows.append([r.source, str(r.df), repr(r.seq_ss), repr(r.adj_ss),
                         _fmt_num(r.adj_ms, "{!r}"), _fmt_num(r.f, "{!r}"),
                         _fmt_num(r.p, "{!r}")])
        return rows


def _fmt_level(v) -> str:
    return f"{v:g}" if isinstance(v, float) else str(v)


def _fmt_num(v, fmt: str) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return UNDEFINED
    return fmt.format(v)


def _fmt_f(v) -> str:
    if v is None:
        return UNDEFINED
    return f"{v:.5E}" if v >= 1e6 else f"{v:.2f}"


def _pct(v) -> str:
    return UNDEFINED if v is None or math.isnan(v) else f"{100.0 * v:.2f}%"


def cell_array(design: FactorialDesign, observations: Iterable[Observation]) -> np.ndarray:
    """Arrange observations into shape ``design.shape + (replicates,)``.

    Raises BalanceError naming every cell without exactly ``replicates`` entries.
    """
    buckets: dict[tuple, list[float]] = {}
    shape = design.shape
    for ob in observations:
        key = tuple(int(i) for i in ob.levels)
        if len(key) != len(shape) or any(not 0 <= i < n for i, n in zip(key, shape)):
            raise ParameterError(f"observation levels {ob.levels} outside design {shape}")
        buckets.setdefault(key, []).append(float(ob.y))
    deficient = [design.label(c) for c in itertools.product(*map(range, shape))
                 if len(buckets.get(c, ())) != design.replicates]
    if deficient:
        raise BalanceError(deficient, design.replicates)
    ys = np.empty(shape + (design.replicates,))
    for key, vals in buckets.items():
        ys[key] = vals
    return ys


def _effect_ss(cell_means: np.ndarray, axes: tuple[int, ...], replicates: int) -> float:
    nf = cell_means.ndim
    effect = np.zeros([cell_means.shape[i] if i in axes else 1 for i in range(nf)])
    for size in range(len(axes) + 1):
        for subset in itertools.combinations(axes, size):
            others = tuple(i for i in range(nf) if i not in subset)
            marginal = cell_means.mean(axis=others, keepdims=True)
            effect = effect + (-1) ** (len(axes) - size) * marginal
    full = np.broadcast_to(effect, cell_means.shape)
    return float(replicates * np.sum(full * full))


def anova_full_factorial(design: FactorialDesign, observations: Iterable[Observation],
                         response: str = "y") -> AnovaTable:
    raw = cell_array(design, observations)
    # SS are shift invariant; shifting by one observation makes constant data exactly zero
    ys = raw - raw.flat[0]
    r = design.replicates
    cell_means = ys.mean(axis=-1)
    grand = ys.mean()

    rows = []
    model_df = 0
    for axes in design.sources():
        df = int(np.prod([design.shape[i] - 1 for i in axes]))
        ss = _effect_ss(cell_means, axes, r)
        rows.append(AnovaRow(design.source_name(axes), df, ss, ss, ss / df if df else None))
        model_df += df

    # likewise per cell, so identical replicates give exactly zero error
    shifted = ys - ys[..., :1]
    within = shifted - shifted.mean(axis=-1, keepdims=True)
    error_ss = float(np.sum(within * within))
    total_dev = ys - grand
    total_ss = float(np.sum(total_dev * total_dev))
    total_df = design.total_runs - 1
    error_df = total_df - model_df
    error_ms = error_ss / error_df if error_df > 0 else None

    testable = error_ms is not None and error_ss > 0
    for row in rows:
        if testable and row.df > 0:
            row.f = row.adj_ms / error_ms
            row.p = f_pvalue(row.f, row.df, error_df)
    rows.append(AnovaRow("Error", error_df, error_ss, error_ss, error_ms))
    rows.append(AnovaRow("Total", total_df, total_ss, total_ss, None))

    if total_ss > 0:
        r_sq = 1.0 - error_ss / total_ss
        r_sq_adj = 1.0 - error_ms / (total_ss / total_df) if error_ms is not None else None
    else:
        r_sq, r_sq_adj = float("nan"), None
    s = math.sqrt(error_ms) if error_ms is not None else None
    return AnovaTable(design, rows, s, r_sq, r_sq_adj, response)


def design_from_labels(names: Sequence[str], label_rows: Sequence[Sequence],
                       ys: Sequence[float]) -> tuple[FactorialDesign, list[Observation]]:
    """Infer a design from raw level labels (sorted ascending) and build observations."""
    if len(label_rows) != len(ys):
        raise ParameterError("label rows and responses differ in length")
    levels = [sorted({row[i] for row in label_rows}) for i in range(len(names))]
    index = [{v: j for j, v in enumerate(lv)} for lv in levels]
    obs = [Observation(tuple(index[i][row[i]] for i in range(len(names))), float(y))
           for row, y in zip(label_rows, ys)]
    counts: dict[tuple, int] = {}
    for ob in obs:
        counts[ob.levels] = counts.get(ob.levels, 0) + 1
    replicates = max(counts.values()) if counts else 1
    design = FactorialDesign(tuple(Factor(n, lv) for n, lv in zip(names, levels)), replicates)
    return design, obs
