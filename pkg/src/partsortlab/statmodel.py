"""Least-squares fits over named basis functions and empirical-O model selection.

Predictors are mappings with keys ``n``, ``k`` and ``p`` (missing keys read
as 0).  Fits solve the column-scaled design with a Householder QR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ParameterError, RankError, SingularityError

LOG_BASE = 2.0
TIE_EPSILON = 1e-3
RANK_TOL = 1e-10


def _get(x: Mapping[str, float], key: str) -> float:
    return float(x.get(key, 0.0))


def _nlogn(x):
    n = _get(x, "n")
    return n * math.log(n, LOG_BASE) if n > 0 else 0.0


STANDARD_TERMS: dict[str, Callable[[Mapping[str, float]], float]] = {
    "1": lambda x: 1.0,
    "n": lambda x: _get(x, "n"),
    "nlogn": _nlogn,
    "p": lambda x: _get(x, "p"),
    "p^2": lambda x: _get(x, "p") ** 2,
    "p^3": lambda x: _get(x, "p") ** 3,
    "k": lambda x: _get(x, "k"),
    "k^2": lambda x: _get(x, "k") ** 2,
    "k^3": lambda x: _get(x, "k") ** 3,
}


@dataclass(frozen=True)
class BasisSpec:
    name: str
    terms: tuple[str, ...]
    functions: tuple[Callable[[Mapping[str, float]], float], ...] = field(repr=False, compare=False)

    def __post_init__(self):
        if not self.terms:
            raise ParameterError("a basis needs at least one function")
        if len(set(self.terms)) != len(self.terms):
            raise ParameterError(f"duplicate basis names in {self.terms}")
        if len(self.functions) != len(self.terms):
            raise ParameterError("terms and functions differ in length")

    def __len__(self):
        return len(self.terms)

    def row(self, x: Mapping[str, float]) -> np.ndarray:
        return np.array([f(x) for f in self.functions], dtype=float)

    def matrix(self, xs: Sequence[Mapping[str, float]]) -> np.ndarray:
        return np.array([self.row(x) for x in xs], dtype=float).reshape(len(xs), len(self))

    @property
    def label(self) -> str:
        return f"{self.name}[{' + '.join(self.terms)}]"


def basis(name: str, *terms: str, custom: Optional[Mapping[str, Callable]] = None) -> BasisSpec:
    """Build a basis from names in ``STANDARD_TERMS`` (or ``custom``)."""
    lookup = dict(STANDARD_TERMS)
    lookup.update(custom or {})
    try:
        funcs = tuple(lookup[t] for t in terms)
    except KeyError as exc:
        raise ParameterError(f"unknown basis term {exc.args[0]!r}") from None
    return BasisSpec(name, tuple(terms), funcs)


def polynomial(var: str, degree: int) -> BasisSpec:
    terms = ["1", var] + [f"{var}^{d}" for d in range(2, degree + 1)]
    return basis(f"deg{degree}-{var}", *terms)


CANDIDATE_SETS: dict[str, list[BasisSpec]] = {
    "n": [basis("linear-n", "1", "n"), basis("nlogn", "1", "nlogn"),
          basis("n+nlogn", "1", "n", "nlogn")],
    "p": [polynomial("p", 1), polynomial("p", 2)],
    "k": [polynomial("k", 1), polynomial("k", 2), polynomial("k", 3)],
}


@dataclass
class ModelFit:
    basis: BasisSpec
    coefficients: np.ndarray
    r2: float
    adj_r2: float
    residuals: np.ndarray
    sse: float
    sst: float

    @property
    def n_points(self) -> int:
        return len(self.residuals)

    def coefficient(self, term: str) -> float:
        return float(self.coefficients[self.basis.terms.index(term)])


def _dependent_columns(r: np.ndarray) -> list[int]:
    diag = np.abs(np.diag(r))
    scale = diag.max() if diag.size else 0.0
    return [j for j, d in enumerate(diag) if not d > RANK_TOL * max(scale, 1.0)]


def least_squares_fit(points: Iterable[tuple[Mapping[str, float], float]],
                      basis_spec: BasisSpec) -> ModelFit:
    """Minimise the residual sum of squares of ``y ~ basis(x)``."""
    points = list(points)
    n_pts, n_par = len(points), len(basis_spec)
    if n_pts < n_par:
        raise RankError(f"{n_pts} points cannot determine {n_par} coefficients")
    x = basis_spec.matrix([pt for pt, _ in points])
    y = np.array([float(v) for _, v in points])

    colscale = np.abs(x).max(axis=0)
    zero = [basis_spec.terms[j] for j in np.flatnonzero(colscale == 0)]
    if zero:
        raise SingularityError(zero)
    q, r = np.linalg.qr(x / colscale)
    bad = _dependent_columns(r)
    if bad:
        raise SingularityError([basis_spec.terms[j] for j in bad])
    coef = solve_triangular(r, q.T @ y) / colscale

    resid = y - x @ coef
    sse = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    if sst > 0:
        r2 = 1.0 - sse / sst
    else:
        r2 = 1.0 if sse == 0 else float("nan")
    if n_pts > n_par and sst > 0:
        adj = 1.0 - (sse / (n_pts - n_par)) / (sst / (n_pts - 1))
    else:
        adj = float("nan")
    return ModelFit(basis_spec, coef, r2, adj, resid, sse, sst)


def predict(fit: ModelFit, predictors: Mapping[str, float]) -> float:
    return float(fit.basis.row(predictors) @ fit.coefficients)


@dataclass
class SelectionReport:
    fits: list[ModelFit]
    chosen: BasisSpec
    title: str = ""
    paper_choice: Optional[str] = None
    epsilon: float = TIE_EPSILON

    @property
    def chosen_fit(self) -> ModelFit:
        return next(f for f in self.fits if f.basis.name == self.chosen.name)

    def fit_for(self, name: str) -> ModelFit:
        for f in self.fits:
            if f.basis.name == name:
                return f
        raise KeyError(name)

    @property
    def concurs(self) -> Optional[bool]:
        if self.paper_choice is None:
            return None
        return self.chosen.name == self.paper_choice

    def to_text(self) -> str:
        lines = []
        if self.title:
            lines.append(self.title)
        lines.append(f"{'model':<24}{'R2':>14}{'adj R2':>14}{'SSE':>16}  coefficients")
        for f in self.fits:
            mark = "*" if f.basis.name == self.chosen.name else " "
            coefs = ", ".join(f"{t}={c:.6g}" for t, c in zip(f.basis.terms, f.coefficients))
            lines.append(f"{mark}{f.basis.name:<23}{f.r2:>14.10f}{f.adj_r2:>14.10f}"
                         f"{f.sse:>16.6e}  {coefs}")
        lines.append(f"selected (max adjusted R2, ties within {self.epsilon:g} -> fewer terms): "
                     f"{self.chosen.label}")
        if self.paper_choice is not None:
            verdict = "concurs" if self.concurs else "differs"
            lines.append(f"published choice: {self.paper_choice} -> rule {verdict}")
        return "\n".join(lines)

    def to_csv_rows(self) -> list[list[str]]:
        width = max(len(f.basis) for f in self.fits)
        rows = [["model", "r2", "adj_r2", "sse"] + [f"coef{i}" for i in range(width)]]
        for f in self.fits:
            rows.append([f.basis.label, repr(f.r2), repr(f.adj_r2), repr(f.sse)]
                        + [repr(float(c)) for c in f.coefficients])
        return rows


def select_model(points, candidates: Sequence[BasisSpec], *, epsilon: float = TIE_EPSILON,
                 title: str = "", paper_choice: Optional[str] = None
                 ) -> tuple[BasisSpec, SelectionReport]:
    """Pick the candidate with the highest adjusted R2.

    Candidates within ``epsilon`` of the best adjusted R2 count as tied and
    the one with the fewest basis functions wins.
    """
    if not candidates:
        raise ParameterError("no candidate models given")
    points = list(points)
    fits = [least_squares_fit(points, c) for c in candidates]

    def score(f: ModelFit) -> float:
        return f.adj_r2 if not math.isnan(f.adj_r2) else f.r2

    best = max(score(f) for f in fits)
    tied = [f for f in fits if score(f) >= best - epsilon]
    winner = min(tied, key=lambda f: (len(f.basis), -score(f)))
    report = SelectionReport(fits, winner.basis, title, paper_choice, epsilon)
    return winner.basis, report


def curve(fit: ModelFit, axis: str, lo: float, hi: float, fixed: Mapping[str, float],
          samples: int = 101) -> list[tuple[float, float]]:
    """Sample the fitted response along ``axis`` with other predictors held at ``fixed``."""
    xs = np.linspace(lo, hi, samples)
    out = []
    for x in xs:
        pt = dict(fixed)
        pt[axis] = float(x)
        out.append((float(x), predict(fit, pt)))
    return out
