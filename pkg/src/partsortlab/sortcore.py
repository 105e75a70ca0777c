"""Partition Sort, a randomized quicksort baseline, and their instrumentation.

Partition Sort splits ``a[lo:hi]`` into a left block of ``(hi - lo) // 2``
keys and a right block holding the rest, with every left key ``<=`` every
right key, then recurses on both blocks.  The split is realised by selecting
the key of rank ``(hi - lo) // 2`` and fencing around it, so the recursion
tree is perfectly balanced regardless of the data.

The hot loops are numba kernels working on ``int64`` arrays.  They count
key-key comparisons and element swaps (a swap of a slot with itself is not
counted) in a two-slot ``int64`` counter array.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numba import njit

from .errors import PartsortError, PreconditionError
from .rng import next_below, seed_state

KeyArray = np.ndarray

# groups of five for the median-of-medians pivot
GROUP = 5
_STACK = 256


@dataclass
class SortStats:
    comparisons: int = 0
    swaps: int = 0
    max_depth: int = 0
    partitions: int = 0

    def add_counters(self, cnt: np.ndarray) -> None:
        self.comparisons += int(cnt[0])
        self.swaps += int(cnt[1])


@dataclass(frozen=True)
class DeterministicSelect:
    """Median-of-medians pivots: linear worst case per partition."""


@dataclass(frozen=True)
class RandomizedSelect:
    """Uniformly random pivots drawn from a stream seeded with ``seed``."""

    seed: int = 0


PartitionStrategy = Union[DeterministicSelect, RandomizedSelect]


def as_keys(a) -> KeyArray:
    """Copy ``a`` into a fresh contiguous int64 array."""
    arr = np.array(a, dtype=np.int64, copy=True)
    if arr.ndim != 1:
        raise ValueError("keys must be one-dimensional")
    return arr


def _strategy_args(strategy: Optional[PartitionStrategy]):
    if strategy is None or isinstance(strategy, DeterministicSelect):
        return False, seed_state(0)
    if isinstance(strategy, RandomizedSelect):
        return True, seed_state(strategy.seed)
    raise TypeError(f"unknown partition strategy: {strategy!r}")


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _swap(a, i, j, cnt):
    if i != j:
        t = a[i]
        a[i] = a[j]
        a[j] = t
        cnt[1] += 1


@njit(cache=True)
def _insertion(a, lo, hi, cnt):
    for i in range(lo + 1, hi):
        j = i
        while j > lo:
            cnt[0] += 1
            if a[j] < a[j - 1]:
                _swap(a, j, j - 1, cnt)
                j -= 1
            else:
                break


@njit(cache=True)
def _three_way(a, lo, hi, pivot, cnt):
    # afterwards: a[lo:lt] < pivot, a[lt:gt] == pivot, a[gt:hi] > pivot
    lt = lo
    i = lo
    gt = hi
    while i < gt:
        x = a[i]
        cnt[0] += 1
        if x < pivot:
            _swap(a, lt, i, cnt)
            lt += 1
            i += 1
        else:
            cnt[0] += 1
            if x > pivot:
                gt -= 1
                _swap(a, i, gt, cnt)
            else:
                i += 1
    return lt, gt


@njit(cache=True)
def _select(a, lo, hi, rank, randomized, rstate, cnt):
    target = lo + rank
    while True:
        m = hi - lo
        if m <= GROUP:
            _insertion(a, lo, hi, cnt)
            return a[target]
        if randomized:
            pivot = a[lo + next_below(rstate, m)]
        else:
            # gather group medians at the front of the range
            ng = 0
            for g in range(lo, hi, GROUP):
                e = min(g + GROUP, hi)
                _insertion(a, g, e, cnt)
                _swap(a, lo + ng, g + (e - g - 1) // 2, cnt)
                ng += 1
            pivot = _select(a, lo, lo + ng, (ng - 1) // 2, randomized, rstate, cnt)
        lt, gt = _three_way(a, lo, hi, pivot, cnt)
        if target < lt:
            hi = lt
        elif target >= gt:
            lo = gt
        else:
            return pivot


@njit(cache=True)
def _partition(a, lo, hi, randomized, rstate, cnt):
    mid = lo + (hi - lo) // 2
    _select(a, lo, hi, mid - lo, randomized, rstate, cnt)
    return mid


@njit(cache=True)
def _split_ok(a, lo, mid, hi):
    if mid - lo != (hi - lo) // 2:
        return False
    left_max = a[lo]
    for i in range(lo + 1, mid):
        if a[i] > left_max:
            left_max = a[i]
    for i in range(mid, hi):
        if a[i] < left_max:
            return False
    return True


@njit(cache=True)
def _partition_sort(a, randomized, rstate, cnt, verify):
    """Sort ``a`` in place.  Returns (max_depth, partitions, bad_splits)."""
    n = a.size
    s_lo = np.empty(_STACK, dtype=np.int64)
    s_hi = np.empty(_STACK, dtype=np.int64)
    s_d = np.empty(_STACK, dtype=np.int64)
    sp = 0
    max_depth = 0
    parts = 0
    bad = 0
    if n < 2:
        return max_depth, parts, bad
    s_lo[0] = 0
    s_hi[0] = n
    s_d[0] = 1
    sp = 1
    while sp > 0:
        sp -= 1
        lo = s_lo[sp]
        hi = s_hi[sp]
        d = s_d[sp]
        if hi - lo < 2:
            continue
        mid = _partition(a, lo, hi, randomized, rstate, cnt)
        parts += 1
        if d > max_depth:
            max_depth = d
        if verify and not _split_ok(a, lo, mid, hi):
            bad += 1
        s_lo[sp] = mid
        s_hi[sp] = hi
        s_d[sp] = d + 1
        sp += 1
        s_lo[sp] = lo
        s_hi[sp] = mid
        s_d[sp] = d + 1
        sp += 1
    return max_depth, parts, bad


@njit(cache=True)
def _hoare(a, lo, hi, rstate, cnt):
    # inclusive bounds; returns j with lo <= j < hi
    _swap(a, lo, lo + next_below(rstate, hi - lo + 1), cnt)
    pivot = a[lo]
    i = lo - 1
    j = hi + 1
    while True:
        i += 1
        cnt[0] += 1
        while a[i] < pivot:
            i += 1
            cnt[0] += 1
        j -= 1
        cnt[0] += 1
        while a[j] > pivot:
            j -= 1
            cnt[0] += 1
        if i >= j:
            return j
        _swap(a, i, j, cnt)


@njit(cache=True)
def _quicksort(a, rstate, cnt):
    s_lo = np.empty(_STACK, dtype=np.int64)
    s_hi = np.empty(_STACK, dtype=np.int64)
    s_lo[0] = 0
    s_hi[0] = a.size - 1
    sp = 1
    depth = 0
    while sp > 0:
        sp -= 1
        lo = s_lo[sp]
        hi = s_hi[sp]
        if lo >= hi:
            continue
        j = _hoare(a, lo, hi, rstate, cnt)
        # larger side pushed first so the stack stays O(log n)
        if j - lo > hi - j - 1:
            s_lo[sp], s_hi[sp] = lo, j
            s_lo[sp + 1], s_hi[sp + 1] = j + 1, hi
        else:
            s_lo[sp], s_hi[sp] = j + 1, hi
            s_lo[sp + 1], s_hi[sp + 1] = lo, j
        sp += 2
        if sp > depth:
            depth = sp
    return depth


# ---------------------------------------------------------------- public API


def _check_range(a, lo: int, hi: int) -> None:
    if not (0 <= lo < hi <= len(a)):
        raise PreconditionError(f"invalid range [{lo}, {hi}) for length {len(a)}")


def _run_inplace(a, lo, hi, fn):
    """Run ``fn(arr)`` on an int64 view of ``a``, writing back if ``a`` is not one."""
    if isinstance(a, np.ndarray) and a.dtype == np.int64 and a.flags.c_contiguous:
        return fn(a)
    arr = as_keys(a)
    result = fn(arr)
    a[lo:hi] = arr[lo:hi].tolist() if not isinstance(a, np.ndarray) else arr[lo:hi]
    return result


def partition(a, lo: int, hi: int, strategy: Optional[PartitionStrategy] = None,
              stats: Optional[SortStats] = None) -> int:
    """Split ``a[lo:hi]`` in place into floor/ceil halves; return the boundary.

    Afterwards ``a[lo:boundary]`` holds the ``(hi - lo) // 2`` smallest keys
    of the range and ``max(a[lo:boundary]) <= min(a[boundary:hi])``.
    """
    _check_range(a, lo, hi)
    if hi - lo < 2:
        raise PreconditionError("partition needs at least two keys")
    randomized, rstate = _strategy_args(strategy)
    cnt = np.zeros(2, dtype=np.int64)
    mid = _run_inplace(a, lo, hi,
                       lambda arr: int(_partition(arr, lo, hi, randomized, rstate, cnt)))
    if stats is not None:
        stats.add_counters(cnt)
        stats.partitions += 1
    return mid


def select_kth(a, lo: int, hi: int, rank: int, strategy: Optional[PartitionStrategy] = None,
               stats: Optional[SortStats] = None) -> int:
    """Return the key of 0-based ``rank`` within ``a[lo:hi]``, fencing ``a`` around it."""
    _check_range(a, lo, hi)
    if not 0 <= rank < hi - lo:
        raise PreconditionError(f"rank {rank} outside [0, {hi - lo})")
    randomized, rstate = _strategy_args(strategy)
    cnt = np.zeros(2, dtype=np.int64)
    value = _run_inplace(a, lo, hi,
                         lambda arr: int(_select(arr, lo, hi, rank, randomized, rstate, cnt)))
    if stats is not None:
        stats.add_counters(cnt)
    return value


SplitHook = Callable[[np.ndarray, int, int, int], None]


def partition_sort(a: Sequence[int], strategy: Optional[PartitionStrategy] = None, *,
                   on_split: Optional[SplitHook] = None,
                   verify_splits: bool = False) -> tuple[KeyArray, SortStats]:
    """Sort a copy of ``a`` with Partition Sort.

    ``on_split(arr, lo, mid, hi)`` is called after every partition when
    given; this drives the recursion from Python and is much slower.
    ``verify_splits`` checks the half-split property inside the kernel and
    raises if any split violates it.
    """
    arr = as_keys(a)
    randomized, rstate = _strategy_args(strategy)
    cnt = np.zeros(2, dtype=np.int64)
    stats = SortStats()
    if on_split is None:
        depth, parts, bad = _partition_sort(arr, randomized, rstate, cnt, verify_splits)
        if bad:
            raise PartsortError(f"{bad} of {parts} partitions violated the half-split invariant")
    else:
        depth, parts = 0, 0
        pending = [(0, arr.size, 1)] if arr.size >= 2 else []
        while pending:
            lo, hi, d = pending.pop()
            mid = int(_partition(arr, lo, hi, randomized, rstate, cnt))
            parts += 1
            depth = max(depth, d)
            on_split(arr, lo, mid, hi)
            for blo, bhi in ((mid, hi), (lo, mid)):
                if bhi - blo >= 2:
                    pending.append((blo, bhi, d + 1))
    stats.add_counters(cnt)
    stats.max_depth = int(depth)
    stats.partitions = int(parts)
    return arr, stats


def quicksort_baseline(a: Sequence[int], seed: int = 0) -> tuple[KeyArray, SortStats]:
    """Random-pivot Hoare quicksort on a copy of ``a``."""
    arr = as_keys(a)
    cnt = np.zeros(2, dtype=np.int64)
    depth = 0
    if arr.size >= 2:
        depth = _quicksort(arr, seed_state(seed), cnt)
    stats = SortStats()
    stats.add_counters(cnt)
    stats.max_depth = int(depth)
    return arr, stats


SORTERS = {
    "partition": lambda keys, strategy=None, seed=0: partition_sort(keys, strategy),
    "quick": lambda keys, strategy=None, seed=0: quicksort_baseline(keys, seed),
}
