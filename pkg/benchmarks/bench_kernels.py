"""Race the numba kernels against their pure-numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    PRIMERACE_NO_NUMBA=1 python3 benchmarks/bench_kernels.py   # numpy only

Each kernel is timed best-of-N on identical inputs after a warmup pass, so
JIT compilation never pollutes the numbers.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from primerace import kernels
from primerace.sieve import base_primes


def best_of(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_classify(size: int, repeats: int):
    lo = 10**8
    primes = base_primes(math.isqrt(lo + size))

    def run(kernel):
        residual = np.arange(lo, lo + size, dtype=np.int64)
        omega = np.zeros(size, dtype=np.uint8)
        kernel(lo, residual, omega, primes)
        return omega

    variants = {"numpy": kernels.classify_segment_numpy}
    if kernels.HAVE_NUMBA:
        variants["numba"] = kernels.classify_segment_numba
    ref = None
    rows = {}
    for name, kernel in variants.items():
        run(kernel)  # warmup (JIT / cache)
        rows[name] = best_of(lambda: run(kernel), repeats)
        got = run(kernel)
        if ref is None:
            ref = got
        elif not np.array_equal(ref, got):
            raise SystemExit("classify_segment: backends disagree")
    return f"classify_segment ({size} values at 1e8)", rows


def bench_omega_bulk(size: int, repeats: int):
    lo = 10**6
    primes = base_primes(math.isqrt(lo + size))
    variants = {"numpy": kernels.omega_bulk_numpy}
    if kernels.HAVE_NUMBA:
        variants["numba"] = kernels.omega_bulk_numba
    ref = None
    rows = {}
    for name, kernel in variants.items():
        kernel(lo, lo + size, primes)
        rows[name] = best_of(lambda: kernel(lo, lo + size, primes), repeats)
        got = kernel(lo, lo + size, primes)
        if ref is None:
            ref = got
        elif not np.array_equal(ref, got):
            raise SystemExit("omega_bulk: backends disagree")
    return f"omega_bulk ({size} values at 1e6)", rows


def bench_mc_reduce(samples: int, terms: int, repeats: int):
    rng = np.random.Generator(np.random.Philox(key=[7, 0]))
    u = rng.random((samples, terms))
    w_re = rng.standard_normal(terms) * 0.01
    w_im = rng.standard_normal(terms) * 0.01
    g = rng.standard_normal(samples)
    out = np.empty(samples)

    variants = {"numpy": kernels.mc_reduce_numpy}
    if kernels.HAVE_NUMBA:
        variants["numba"] = kernels.mc_reduce_numba
    ref = None
    rows = {}
    for name, kernel in variants.items():
        kernel(u, w_re, w_im, 1.0, 0.1, g, out)
        rows[name] = best_of(
            lambda: kernel(u, w_re, w_im, 1.0, 0.1, g, out), repeats
        )
        kernel(u, w_re, w_im, 1.0, 0.1, g, out)
        if ref is None:
            ref = out.copy()
        elif not np.allclose(ref, out, rtol=1e-12, atol=1e-12):
            raise SystemExit("mc_reduce: backends disagree")
    return f"mc_reduce ({samples} x {terms})", rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1 << 20,
                    help="segment length for the sieve kernels")
    ap.add_argument("--samples", type=int, default=1 << 15,
                    help="Monte Carlo block height")
    ap.add_argument("--terms", type=int, default=203,
                    help="Monte Carlo oscillator count")
    ap.add_argument("--repeats", type=int, default=5, help="best-of repeats")
    args = ap.parse_args()

    print(f"backend selected: {kernels.BACKEND} (numba available: {kernels.HAVE_NUMBA})")
    results = [
        bench_classify(args.size, args.repeats),
        bench_omega_bulk(min(args.size, 1 << 18), args.repeats),
        bench_mc_reduce(args.samples, args.terms, args.repeats),
    ]
    for label, rows in results:
        print(f"\n{label}")
        base = rows.get("numpy")
        for name in ("numpy", "numba"):
            if name not in rows:
                continue
            extra = ""
            if name == "numba" and base:
                extra = f"  ({base / rows[name]:.1f}x vs numpy)"
            print(f"  {name:6s} {rows[name] * 1e3:9.2f} ms{extra}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
