"""Hot inner loops, with numba acceleration and a pure-numpy fallback.

Backend selection happens once at import time:

* default: try numba; fall back to numpy if it is missing or broken
* ``PRIMERACE_NO_NUMBA=1`` in the environment forces the numpy path

``BACKEND`` records which path is active and is stamped into run manifests.
Both implementations of every kernel are importable (``_numba`` / ``_numpy``
suffixes) so the benchmark script can race them against each other; the
unsuffixed names are the selected ones.

The numba kernels release the GIL, so segment classification and Monte Carlo
shards parallelize across a thread pool. The numpy fallbacks rely on ufunc
loops releasing the GIL internally, which is good enough in practice.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCED_OFF = os.environ.get("PRIMERACE_NO_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

HAVE_NUMBA = False
if not _FORCED_OFF:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except Exception:
        HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# segment classification: divide out primes, count factors with multiplicity

def classify_segment_numpy(lo, residual, omega, primes):
    """Divide every prime power out of residual, accumulating counts in omega.

    residual must start as the integers lo, lo+1, ... and primes must contain
    every prime up to sqrt(lo + residual.size - 1). Arrays are modified in
    place. After the call omega[i] is the number of prime factors of lo + i
    counted with multiplicity, and residual[i] is the one prime factor that
    exceeded the base list (or 1).
    """
    n = residual.size
    top = lo + n - 1
    for p in primes:
        p = int(p)
        if p * p > top:
            break
        pk = p
        while pk <= top:
            start = ((lo + pk - 1) // pk) * pk
            if start <= top:
                sl = slice(start - lo, n, pk)
                omega[sl] += 1
                residual[sl] //= p
            if pk > top // p:
                break
            pk *= p
    big = residual > 1
    omega[big] += 1


def _classify_segment_py(lo, residual, omega, primes):
    # same element-wise formulation the numba kernel compiles
    n = residual.size
    top = lo + n - 1
    for idx in range(primes.size):
        p = primes[idx]
        if p * p > top:
            break
        start = ((lo + p - 1) // p) * p
        for off in range(start - lo, n, p):
            r = residual[off]
            cnt = 0
            while r % p == 0:
                r //= p
                cnt += 1
            residual[off] = r
            omega[off] += cnt
    for i in range(n):
        if residual[i] > 1:
            omega[i] += 1


# ---------------------------------------------------------------------------
# factor-count oracle: plain trial division, independent of the sieve

def omega_oracle(n):
    """Number of prime factors of n counted with multiplicity, by trial
    division. Slow and obviously correct; the test oracle for the sieve.
    """
    n = int(n)
    if n < 1 or n > 10**9:
        raise ValueError(f"omega_oracle requires 1 <= n <= 10**9, got {n}")
    total = 0
    m = n
    while m % 2 == 0:
        m //= 2
        total += 1
    d = 3
    while d * d <= m:
        while m % d == 0:
            m //= d
            total += 1
        d += 2
    if m > 1:
        total += 1
    return total


def omega_bulk_numpy(lo, hi, primes):
    """Factor counts for every n in [lo, hi) by vectorized trial division.

    Deliberately structured differently from the segmented sieve (whole-array
    repeated division per prime, no stride arithmetic) so the two routes stay
    independent.
    """
    m = np.arange(lo, hi, dtype=np.int64)
    om = np.zeros(m.size, dtype=np.uint8)
    top = hi - 1
    for p in primes:
        p = int(p)
        if p * p > top:
            break
        while True:
            mask = m % p == 0
            if not mask.any():
                break
            m[mask] //= p
            om[mask] += 1
    om[m > 1] += 1
    return om


def _omega_bulk_py(lo, hi, primes):
    out = np.zeros(hi - lo, dtype=np.uint8)
    for i in range(hi - lo):
        n = lo + i
        total = 0
        for j in range(primes.size):
            p = primes[j]
            if p * p > n:
                break
            while n % p == 0:
                n //= p
                total += 1
        if n > 1:
            total += 1
        out[i] = total
    return out


# ---------------------------------------------------------------------------
# Monte Carlo reduction: samples of base + sum of 2*Re(phase * amplitude)

def mc_reduce_numpy(u, w_re, w_im, base, tail_sigma, g, out):
    """out[i] = base + 2*sum_j(cos(2 pi u[i,j]) w_re[j] - sin(...) w_im[j])
    + tail_sigma * g[i].

    u is a (samples, terms) block of uniforms in [0,1); g standard normals.
    """
    ang = (2.0 * np.pi) * u
    c = np.cos(ang)
    s = np.sin(ang)
    np.multiply(2.0, c @ w_re - s @ w_im, out=out)
    out += base
    if tail_sigma != 0.0:
        out += tail_sigma * g
    return out


def _mc_reduce_py(u, w_re, w_im, base, tail_sigma, g, out):
    nsamp, nterm = u.shape
    for i in range(nsamp):
        acc = 0.0
        for j in range(nterm):
            ang = 2.0 * math.pi * u[i, j]
            acc += math.cos(ang) * w_re[j] - math.sin(ang) * w_im[j]
        out[i] = base + 2.0 * acc + tail_sigma * g[i]
    return out


# ---------------------------------------------------------------------------
# backend wiring

if HAVE_NUMBA:
    classify_segment_numba = njit(cache=True, nogil=True)(_classify_segment_py)
    omega_bulk_numba = njit(cache=True, nogil=True)(_omega_bulk_py)
    mc_reduce_numba = njit(cache=True, nogil=True)(_mc_reduce_py)

    classify_segment_kernel = classify_segment_numba
    omega_bulk = omega_bulk_numba
    mc_reduce = mc_reduce_numba

    def warmup():
        """Trigger JIT compilation of every kernel on tiny inputs."""
        r = np.arange(2, 34, dtype=np.int64)
        om = np.zeros(r.size, dtype=np.uint8)
        pr = np.array([2, 3, 5], dtype=np.int64)
        classify_segment_kernel(2, r, om, pr)
        omega_bulk(2, 34, pr)
        u = np.zeros((2, 3))
        mc_reduce(u, np.ones(3), np.zeros(3), 0.0, 0.0, np.zeros(2), np.zeros(2))
else:
    classify_segment_kernel = classify_segment_numpy
    omega_bulk = omega_bulk_numpy
    mc_reduce = mc_reduce_numpy

    def warmup():
        """No-op on the numpy backend."""
