"""Segmented factor-count sieve.

Classifies every integer in a range as prime, semiprime (product of exactly
two primes, equal primes allowed), or other, by dividing base primes out of
each segment. Segments are half-open [lo, hi), processed in ascending order,
and a range always starts at 2. 64-bit arithmetic throughout; the supported
range tops out at 10**9.

The inner divide-out loop lives in kernels.py (numba if available, numpy
fallback). `omega_oracle` is an intentionally naive trial-division cross-check
kept independent of the sieve.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .kernels import omega_oracle  # noqa: F401  (re-exported)

SEGMENT_SIZE = 1 << 22
HARD_LIMIT = 10**9

# omega categories
OTHER = 0
PRIME = 1
SEMIPRIME = 2


class OmegaClass(NamedTuple):
    n: int
    category: int  # PRIME, SEMIPRIME, or OTHER


@dataclass
class Segment:
    """One half-open block [lo, hi) of consecutive integers.

    residual holds what is left of each n after the base primes found so far
    have been divided out; omega counts the prime factors removed, with
    multiplicity. After classification, residual is either 1 or the single
    prime factor larger than every base prime, and omega is the full factor
    count.
    """

    lo: int
    hi: int
    residual: np.ndarray
    omega: np.ndarray
    classified: bool = field(default=False, compare=False)

    def classes(self) -> np.ndarray:
        """uint8 array: PRIME, SEMIPRIME or OTHER for each n in [lo, hi)."""
        if not self.classified:
            raise ValueError("segment has not been classified yet")
        om = self.omega
        return np.where((om == 1) | (om == 2), om, 0).astype(np.uint8)

    def __iter__(self) -> Iterator[OmegaClass]:
        cats = self.classes()
        for i in range(self.lo, self.hi):
            yield OmegaClass(i, int(cats[i - self.lo]))


def make_segment(lo: int, hi: int) -> Segment:
    if not 2 <= lo < hi:
        raise ValueError(f"need 2 <= lo < hi, got [{lo}, {hi})")
    if hi - 1 > HARD_LIMIT:
        raise ValueError(f"range exceeds the supported limit {HARD_LIMIT}")
    residual = np.arange(lo, hi, dtype=np.int64)
    omega = np.zeros(hi - lo, dtype=np.uint8)
    return Segment(lo, hi, residual, omega)


def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending, as int64. Odds-only sieve."""
    limit = int(limit)
    if limit < 2:
        raise ValueError(f"base_primes requires limit >= 2, got {limit}")
    if limit > HARD_LIMIT:
        raise ValueError(f"base_primes capped at {HARD_LIMIT}, got {limit}")
    if limit < 3:
        return np.array([2], dtype=np.int64)
    half = (limit + 1) // 2  # index i <-> odd number 2i+1
    sieve = np.ones(half, dtype=np.bool_)
    sieve[0] = False  # 1
    for i in range(3, math.isqrt(limit) + 1, 2):
        if sieve[i // 2]:
            sieve[i * i // 2 :: i] = False
    odds = 2 * np.nonzero(sieve)[0].astype(np.int64) + 1
    return np.concatenate((np.array([2], dtype=np.int64), odds))


def classify_segment(segment: Segment, primes: np.ndarray) -> Segment:
    """Run the divide-out kernel over one segment, in place.

    primes must contain every prime up to sqrt(hi - 1); too short a list is a
    hard error because the classification would silently overcount.
    """
    top = segment.hi - 1
    need = math.isqrt(top)
    if top >= 4:
        err = ValueError(
            f"insufficient base primes: need all primes <= {need}, "
            f"largest given is {int(primes[-1]) if primes.size else 'none'}"
        )
        if primes.size == 0:
            raise err
        last = int(primes[-1])
        # the list may end below isqrt(top) as long as no prime hides in
        # between; certify each candidate composite with the given primes
        for c in range(last + 1, need + 1):
            if last * last < c:
                raise err
            if all(c % int(p) for p in primes if p * p <= c):
                raise err
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    kernels.classify_segment_kernel(
        segment.lo, segment.residual, segment.omega, primes
    )
    segment.classified = True
    return segment


def _imap_ordered(fn, items: Iterable, workers: int, prefetch: int = 2):
    """map() preserving order, with a bounded number of in-flight tasks."""
    if workers <= 1:
        for item in items:
            yield fn(item)
        return
    it = iter(items)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = [pool.submit(fn, x) for x in itertools.islice(it, workers + prefetch)]
        for item in it:
            fut = pending.pop(0)
            pending.append(pool.submit(fn, item))
            yield fut.result()
        for fut in pending:
            yield fut.result()


def segment_stream(
    start: int,
    stop: int,
    *,
    segment_size: int = SEGMENT_SIZE,
    primes: np.ndarray | None = None,
    workers: int = 1,
) -> Iterator[Segment]:
    """Classified segments tiling [start, stop), ascending and contiguous."""
    if not 2 <= start < stop:
        raise ValueError(f"need 2 <= start < stop, got [{start}, {stop})")
    if stop - 1 > HARD_LIMIT:
        raise ValueError(f"range exceeds the supported limit {HARD_LIMIT}")
    if segment_size < 16:
        raise ValueError("segment_size too small")
    if primes is None:
        primes = base_primes(max(2, math.isqrt(stop - 1)))
    primes = np.ascontiguousarray(primes, dtype=np.int64)

    bounds = list(range(start, stop, segment_size)) + [stop]
    spans = list(zip(bounds[:-1], bounds[1:]))

    def work(span):
        lo, hi = span
        return classify_segment(make_segment(lo, hi), primes)

    yield from _imap_ordered(work, spans, workers)
