"""Experiment plan files.

A plan is an INI-style text file::

    # Table 1 grid
    [grid]
    n = 10000:100000:10000      ; inclusive start:stop:step, or a comma list
    k = 1000
    p = 0.5
    dist = nb                   ; nb (default) or binomial (k is then the trial count)

    [run]
    trials = 100                ; default 100
    seed = 20120201             ; default DEFAULT_SEED
    measure = both              ; time | comparisons | both
    algorithm = partition       ; partition | quick
    strategy = det              ; det | rand
    warmup = 0
    reuse_dataset = false
    method = geometric          ; geometric | bernoulli

``[grid]`` needs ``n``, ``k`` and ``p``; every combination of the k and p
lists becomes one distribution, crossed with every n.  Lines starting with
``#`` or ``;`` are comments.
"""
from __future__ import annotations

import configparser
import math
import os

from .distgen import NB_METHODS, Binomial, NegBinomial
from .errors import ParameterError, PlanError
from .harness import MEASURES, ExperimentPlan
from .rng import DEFAULT_SEED

GRID_KEYS = {"n", "k", "p", "dist"}
RUN_KEYS = {"trials", "seed", "measure", "algorithm", "strategy", "warmup", "reuse_dataset",
            "method"}


def _numbers(field: str, text: str, kind):
    values = []
    for chunk in text.replace(",", " ").split():
        try:
            if ":" in chunk:
                start, stop, step = (kind(x) for x in chunk.split(":"))
                if step <= 0:
                    raise ValueError("step must be positive")
                count = int(math.floor((stop - start) / step + 1e-9)) + 1
                values.extend(start + i * step for i in range(max(count, 0)))
            else:
                values.append(kind(chunk))
        except ValueError as exc:
            raise PlanError(f"field {field!r}: cannot parse {chunk!r} ({exc})", field=field) from None
    if not values:
        raise PlanError(f"field {field!r} is empty", field=field)
    return values


def parse_plan(text: str, source: str = "<plan>") -> ExperimentPlan:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"),
                                   comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise PlanError(f"{source}:{exc.lineno}: expected a [section] header", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise PlanError(f"{source}:{lineno}: syntax error near {line}", line=lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise PlanError(f"{source}:{exc.lineno}: {exc.message}", line=exc.lineno) from None

    for section in cp.sections():
        if section not in ("grid", "run"):
            raise PlanError(f"unknown section [{section}]", field=section)
    if not cp.has_section("grid"):
        raise PlanError("plan has no [grid] section", field="grid")
    grid = cp["grid"]
    run = cp["run"] if cp.has_section("run") else {}
    for key in grid:
        if key not in GRID_KEYS:
            raise PlanError(f"unknown field {key!r} in [grid]", field=key)
    for key in run:
        if key not in RUN_KEYS:
            raise PlanError(f"unknown field {key!r} in [run]", field=key)
    for key in ("n", "k", "p"):
        if key not in grid:
            raise PlanError(f"[grid] is missing field {key!r}", field=key)

    ns = _numbers("n", grid["n"], int)
    ks = _numbers("k", grid["k"], int)
    ps = [round(p, 12) for p in _numbers("p", grid["p"], float)]
    dist = grid.get("dist", "nb").strip().lower()
    if dist not in ("nb", "binomial"):
        raise PlanError(f"field 'dist' must be nb or binomial, got {dist!r}", field="dist")
    law = NegBinomial if dist == "nb" else Binomial

    specs = []
    for k in ks:
        for p in ps:
            try:
                specs.append(law(k, p))
            except ParameterError as exc:
                field = "p" if "p must" in str(exc) else "k"
                raise PlanError(f"field {field!r}: {exc}", field=field) from None
    if any(n < 0 for n in ns):
        raise PlanError("field 'n': sizes must be >= 0", field="n")

    def get_int(key, default):
        if key not in run:
            return default
        try:
            return int(run[key])
        except ValueError:
            raise PlanError(f"field {key!r} must be an integer, got {run[key]!r}", field=key) from None

    def get_choice(key, default, choices):
        value = str(run.get(key, default)).strip().lower()
        if value not in choices:
            raise PlanError(f"field {key!r} must be one of {choices}, got {value!r}", field=key)
        return value

    trials = get_int("trials", 100)
    if trials < 1:
        raise PlanError("field 'trials' must be >= 1", field="trials")
    warmup = get_int("warmup", 0)
    if warmup < 0:
        raise PlanError("field 'warmup' must be >= 0", field="warmup")
    reuse = str(run.get("reuse_dataset", "false")).strip().lower()
    if reuse not in ("true", "false", "yes", "no", "1", "0"):
        raise PlanError(f"field 'reuse_dataset' must be a boolean, got {reuse!r}",
                        field="reuse_dataset")

    return ExperimentPlan(
        n_levels=ns,
        dist_grid=specs,
        trials=trials,
        master_seed=get_int("seed", DEFAULT_SEED),
        measure=get_choice("measure", "both", MEASURES),
        algorithm=get_choice("algorithm", "partition", ("partition", "quick")),
        strategy=get_choice("strategy", "det", ("det", "rand")),
        warmup=warmup,
        reuse_dataset=reuse in ("true", "yes", "1"),
        method=get_choice("method", "geometric", NB_METHODS),
    )


def load_plan(path: os.PathLike) -> ExperimentPlan:
    with open(path) as fh:
        text = fh.read()
    return parse_plan(text, source=str(path))
