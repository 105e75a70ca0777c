"""Published measurements shipped with the package.

Tables 1-3 are mean sort times (seconds) over 100 trials on NB(k, p) keys;
table 4 is the 3x3x3 grid used for the factorial analysis.  Table 4's printed
caption names a "Binomial (k, p)" input although the surrounding experiment is
the negative binomial one; the data are treated as negative binomial runs.
"""
from __future__ import annotations

import csv
import io
from importlib import resources

from .anova import FactorialDesign, Factor, Observation

# factor order of the published ANOVA output
ANOVA_FACTORS = ("n", "p", "k")

PUBLISHED_CHOICE = {"table1": "nlogn", "table2": "deg2-p", "table3": "deg3-k"}
SWEEP_AXIS = {"table1": "n", "table2": "p", "table3": "k"}


def _read(name: str) -> list[dict[str, str]]:
    text = resources.files(__package__).joinpath("data").joinpath(name).read_text()
    return list(csv.DictReader(io.StringIO(text)))


def table_points(name: str) -> list[tuple[dict[str, float], float]]:
    """``[(predictors, T), ...]`` for ``table1`` .. ``table4``."""
    return [({"n": int(r["n"]), "k": int(r["k"]), "p": float(r["p"])}, float(r["T"]))
            for r in _read(f"{name}.csv")]


def table4_design(replicates: int = 3) -> tuple[FactorialDesign, list[Observation]]:
    """Table 4 cell means, each repeated ``replicates`` times, as an (n, p, k) design."""
    points = table_points("table4")
    levels = {f: sorted({pt[f] for pt, _ in points}) for f in ANOVA_FACTORS}
    design = FactorialDesign(tuple(Factor(f, levels[f]) for f in ANOVA_FACTORS), replicates)
    obs = []
    for pt, t in points:
        idx = tuple(levels[f].index(pt[f]) for f in ANOVA_FACTORS)
        obs.extend(Observation(idx, t) for _ in range(replicates))
    return design, obs


def published_anova() -> dict[str, dict[str, str]]:
    """The printed ANOVA rows keyed by source, values as printed."""
    return {r["source"]: r for r in _read("anova_published.csv")}
