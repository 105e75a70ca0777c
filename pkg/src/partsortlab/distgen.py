"""Reproducible variates for the input laws used as sort keys.

The negative binomial variate here counts *trials*: NB(k, p) is the number
of Bernoulli(p) trials needed to collect k successes, so its support starts
at k (mean k/p, variance k(1-p)/p**2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from .errors import ParameterError
from .rng import DEFAULT_SEED, RngStream, next_u64, next_uniform

BERNOULLI_SIM = "bernoulli"
GEOMETRIC_SUM = "geometric"
NB_METHODS = (BERNOULLI_SIM, GEOMETRIC_SUM)


def _check_prob(p, *, allow_zero: bool) -> float:
    p = float(p)
    lower_ok = p >= 0.0 if allow_zero else p > 0.0
    if not (lower_ok and p <= 1.0) or math.isnan(p):
        bounds = "[0, 1]" if allow_zero else "(0, 1]"
        raise ParameterError(f"p must lie in {bounds}, got {p}")
    return p


def _check_count(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class NegBinomial:
    k: int
    p: float

    def __post_init__(self):
        object.__setattr__(self, "k", _check_count(self.k, "k"))
        object.__setattr__(self, "p", _check_prob(self.p, allow_zero=False))

    @property
    def label(self) -> str:
        return f"NB(k={self.k}, p={self.p:g})"


@dataclass(frozen=True)
class Binomial:
    m: int
    p: float

    def __post_init__(self):
        object.__setattr__(self, "m", _check_count(self.m, "m"))
        object.__setattr__(self, "p", _check_prob(self.p, allow_zero=True))

    @property
    def label(self) -> str:
        return f"Binomial(m={self.m}, p={self.p:g})"


@dataclass(frozen=True)
class UniformInt:
    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) > int(self.hi):
            raise ParameterError(f"UniformInt needs lo <= hi, got {self.lo} > {self.hi}")
        if int(self.lo) < -(2**63) or int(self.hi) >= 2**63:
            raise ParameterError("UniformInt bounds must fit in signed 64 bits")

    @property
    def label(self) -> str:
        return f"UniformInt({self.lo}, {self.hi})"


DistributionSpec = Union[NegBinomial, Binomial, UniformInt]


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _geometric(s, p, log_q):
    if p >= 1.0:
        return 1
    x = math.ceil(math.log1p(-next_uniform(s)) / log_q)
    return max(1, np.int64(x))


@njit(cache=True)
def _nb_geometric(s, k, p, log_q):
    total = 0
    for _ in range(k):
        total += _geometric(s, p, log_q)
    return total


@njit(cache=True)
def _nb_bernoulli(s, k, p):
    trials = 0
    successes = 0
    while successes < k:
        trials += 1
        if next_uniform(s) < p:
            successes += 1
    return trials


@njit(cache=True)
def _binomial(s, m, p):
    hits = 0
    for _ in range(m):
        if next_uniform(s) < p:
            hits += 1
    return hits


@njit(cache=True)
def _fill_geometric(s, out, p):
    log_q = math.log1p(-p) if p < 1.0 else -np.inf
    for i in range(out.size):
        out[i] = _geometric(s, p, log_q)


@njit(cache=True)
def _fill_nb(s, out, k, p, bernoulli):
    log_q = math.log1p(-p) if p < 1.0 else -np.inf
    for i in range(out.size):
        if bernoulli:
            out[i] = _nb_bernoulli(s, k, p)
        else:
            out[i] = _nb_geometric(s, k, p, log_q)


@njit(cache=True)
def _fill_binomial(s, out, m, p):
    for i in range(out.size):
        out[i] = _binomial(s, m, p)


@njit(cache=True)
def _fill_uniform_int(s, out, lo, span):
    # span = hi - lo + 1 as uint64; 0 encodes the full 2**64 range
    if span == 0:
        for i in range(out.size):
            out[i] = np.int64(next_u64(s))
        return
    threshold = (np.uint64(0) - span) % span
    for i in range(out.size):
        while True:
            r = next_u64(s)
            if r >= threshold:
                break
        out[i] = lo + np.int64(r % span)


# ---------------------------------------------------------------- public API


def _stream(rng) -> RngStream:
    if rng is None:
        return RngStream(DEFAULT_SEED)
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))


def geometric_from_uniform(u: float, p: float) -> int:
    """Inverse transform: trials up to the first success for uniform ``u``."""
    p = _check_prob(p, allow_zero=False)
    if p == 1.0:
        return 1
    return max(1, math.ceil(math.log1p(-u) / math.log1p(-p)))


def geometric_sample(p: float, rng=None, size: int | None = None):
    """Trials up to and including the first success; P(X=x) = (1-p)**(x-1) p."""
    p = _check_prob(p, allow_zero=False)
    out = np.empty(1 if size is None else size, dtype=np.int64)
    _fill_geometric(_stream(rng).state, out, p)
    return int(out[0]) if size is None else out


def nb_sample(k: int, p: float, rng=None, method: str = GEOMETRIC_SUM, size: int | None = None):
    """Negative binomial variate(s): trials needed for ``k`` successes.

    ``method`` is ``"geometric"`` (sum of k inverse-transform geometrics,
    the default) or ``"bernoulli"`` (simulate every trial).
    """
    spec = NegBinomial(k, p)
    if method not in NB_METHODS:
        raise ParameterError(f"unknown NB method {method!r}; expected one of {NB_METHODS}")
    out = np.empty(1 if size is None else size, dtype=np.int64)
    _fill_nb(_stream(rng).state, out, spec.k, spec.p, method == BERNOULLI_SIM)
    return int(out[0]) if size is None else out


def binomial_sample(m: int, p: float, rng=None, size: int | None = None):
    spec = Binomial(m, p)
    out = np.empty(1 if size is None else size, dtype=np.int64)
    _fill_binomial(_stream(rng).state, out, spec.m, spec.p)
    return int(out[0]) if size is None else out


def generate_dataset(spec: DistributionSpec, n: int, seed: int = DEFAULT_SEED,
                     method: str = GEOMETRIC_SUM) -> np.ndarray:
    """``n`` i.i.d. keys from ``spec``, fully determined by ``seed``."""
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    rng = RngStream(seed)
    if isinstance(spec, NegBinomial):
        return nb_sample(spec.k, spec.p, rng, method=method, size=n)
    if isinstance(spec, Binomial):
        return binomial_sample(spec.m, spec.p, rng, size=n)
    if isinstance(spec, UniformInt):
        out = np.empty(n, dtype=np.int64)
        span = (int(spec.hi) - int(spec.lo) + 1) % (1 << 64)
        _fill_uniform_int(rng.state, out, np.int64(spec.lo), np.uint64(span))
        return out
    raise ParameterError(f"unknown distribution spec {spec!r}")
