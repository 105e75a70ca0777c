"""Seeded 64-bit random streams.

The generator is xoshiro256** (Blackman & Vigna, 2018) with its 256-bit state
filled from a SplitMix64 sequence started at the user seed.  Both algorithms
are fixed here so a given seed gives the same draws on every platform,
independent of NumPy's or Python's default generators.

Uniform doubles are ``((x >> 11) + 0.5) * 2**-53``, which lies strictly
inside (0, 1).

Seed splitting: ``derive_seed(master, a, b, ...)`` folds each part into the
master with SplitMix64 finalisation, so the stream for (cell i, trial t) is
``RngStream(derive_seed(master, i, t))``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 20120201

_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> tuple[int, int]:
    """One SplitMix64 step; returns (next_state, output)."""
    x = (x + _GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def derive_seed(master: int, *parts: int) -> int:
    h = master & MASK64
    for part in parts:
        _, mixed = splitmix64(int(part) & MASK64)
        _, h = splitmix64(h ^ mixed)
    return h


def seed_state(seed: int) -> np.ndarray:
    x = seed & MASK64
    out = []
    for _ in range(4):
        x, z = splitmix64(x)
        out.append(z)
    return np.array(out, dtype=np.uint64)


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def next_uniform(s):
    return (float(next_u64(s) >> np.uint64(11)) + 0.5) * _INV_2_53


@njit(cache=True)
def next_below(s, bound):
    """Unbiased integer in [0, bound) for 1 <= bound < 2**63 (rejection)."""
    b = np.uint64(bound)
    threshold = (np.uint64(0) - b) % b
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % b)


@njit(cache=True)
def _fill_u64(s, out):
    for i in range(out.size):
        out[i] = next_u64(s)


@njit(cache=True)
def _fill_uniform(s, out):
    for i in range(out.size):
        out[i] = next_uniform(s)


class RngStream:
    """A xoshiro256** stream owned by one logical task."""

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = int(seed) & MASK64
        self.state = seed_state(self.seed)

    def __repr__(self):
        return f"RngStream(seed={self.seed})"

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def uniform(self) -> float:
        return float(next_uniform(self.state))

    def u64s(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.uint64)
        _fill_u64(self.state, out)
        return out

    def uniforms(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.float64)
        _fill_uniform(self.state, out)
        return out

    def spawn(self, *parts: int) -> "RngStream":
        return RngStream(derive_seed(self.seed, *parts))
