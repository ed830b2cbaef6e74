"""Limiting distribution of the normalized prime race, and bias densities.

Under the standard hypotheses the normalized difference
(log x / sqrt x)(pi(x;q,a) - pi(x;q,b)) has a limiting distribution: a
constant mean (n_sqrt(q,b) - n_sqrt(q,a)) / phi(q) plus one almost-periodic
term per critical-line zero. Truncating at height T leaves

    X = mean + sum over zeros gamma <= T of 2 Re(z_gamma * w_gamma) + tail

with z_gamma independent uniform on the unit circle and amplitude

    w_gamma = m(gamma) * (conj chi(b) - conj chi(a)) / (phi(q) (1/2 + i gamma)).

The discarded zeros above T are modeled by a centered Gaussian whose variance
is the integral of the squared amplitudes against the smooth zero-counting
density. Bias densities are then Monte Carlo probabilities:

    density_delta  = P[X > 0]
    density_delta2 = P[X < (n_sqrt(q,b) - n_sqrt(q,a)) / (2 phi(q))]

the second via the reflection that sends the semiprime race onto the prime
race's distribution. Joint probabilities share the z_gamma draws across
(a,b) pairs (the pairs ride the same zeros); the Gaussian tail surrogate is
drawn independently per pair, which ignores the (tiny) tail correlation.

Sampling is chunked with a counter-based generator keyed on (seed, chunk), so
a fixed seed reproduces estimates bit-identically regardless of worker count.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .characters import characters
from .race import RaceConfig, n_sqrt
from .zeros import ZeroList

DEFAULT_HEIGHT = 300.0
DEFAULT_SAMPLES = 2_000_000
DEFAULT_SEED = 12345
CHUNK = 1 << 15
_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass
class LimitRV:
    """Truncated limiting random variable for one (a, b) race."""

    mean: float
    amplitudes: np.ndarray  # complex, one per zero (ordinates in gammas)
    gammas: np.ndarray
    tail_sigma: float
    config: RaceConfig
    zero_height: float

    @property
    def terms(self) -> list[tuple[complex, float]]:
        """(amplitude, ordinate) pairs, the per-zero oscillators."""
        return [(complex(w), float(g)) for w, g in zip(self.amplitudes, self.gammas)]

    @property
    def variance(self) -> float:
        """Total variance: 2|w|^2 per oscillator plus the Gaussian tail."""
        return float(2.0 * (np.abs(self.amplitudes) ** 2).sum() + self.tail_sigma**2)


@dataclass
class DensityEstimate:
    value: float
    half_width: float  # 95% Wilson interval half-width
    samples: int
    zero_height: float


def _wilson(successes: int, n: int) -> tuple[float, float]:
    z = _WILSON_Z
    p = successes / n
    denom = 1.0 + z * z / n
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    return p, half


def _tail_integral(q: int, T: float) -> float:
    """integral_T^inf 2/(1/4 + t^2) dN(t) with the smooth density
    dN = (1/2pi) log(qt/2pi) dt, clipped where the log goes negative."""
    t0 = 2.0 * math.pi / q  # where log(qt/2pi) = 0
    lo = max(float(T), t0)
    hi = 1e7
    ts = np.geomspace(lo, hi, 40001)
    integrand = np.log(q * ts / (2.0 * math.pi)) / (math.pi * (0.25 + ts * ts))
    val = float(np.trapezoid(integrand, ts))
    # analytic remainder beyond hi: 1/4 + t^2 ~ t^2 there
    c = q / (2.0 * math.pi)
    val += (math.log(c * hi) + 1.0) / (math.pi * hi)
    return val


def build_limit_rv(
    config: RaceConfig,
    zero_lists: Sequence[ZeroList],
    *,
    with_tail: bool = True,
) -> LimitRV:
    """Assemble the truncated limiting rv from per-character zero lists.

    Every nonprincipal character mod q must be covered, all at the same
    height; anything missing or inconsistent is an error, because a silently
    absent character would bias the distribution.
    """
    q, a, b = config.q, config.a, config.b
    by_char = {}
    for zl in zero_lists:
        if zl.character.q != q:
            raise ValueError(
                f"zero list for modulus {zl.character.q} in a mod-{q} race"
            )
        if zl.character.index in by_char:
            raise ValueError(
                f"duplicate zero list for character index {zl.character.index} mod {q}"
            )
        by_char[zl.character.index] = zl
    needed = [chi for chi in characters(q) if not chi.is_principal]
    missing = [chi.index for chi in needed if chi.index not in by_char]
    if missing:
        raise ValueError(
            f"missing zero lists for character indices {missing} mod {q}"
        )
    heights = {float(by_char[chi.index].height) for chi in needed}
    if len(heights) > 1:
        raise ValueError(f"zero lists disagree on height: {sorted(heights)}")
    height = heights.pop()

    phi_q = config.phi_q
    mean = (n_sqrt(q, b) - n_sqrt(q, a)) / phi_q

    amp_list, gamma_list = [], []
    coef_sq_total = 0.0
    for chi in needed:
        zl = by_char[chi.index]
        coef = (np.conj(chi.value(b)) - np.conj(chi.value(a))) / phi_q
        coef_sq_total += abs(coef) ** 2
        if abs(coef) == 0.0:
            continue
        w = coef * zl.multiplicities / (0.5 + 1j * zl.gammas)
        amp_list.append(w)
        gamma_list.append(zl.gammas)

    if amp_list:
        amplitudes = np.concatenate(amp_list)
        gammas = np.concatenate(gamma_list)
        order = np.argsort(gammas, kind="stable")
        amplitudes, gammas = amplitudes[order], gammas[order]
    else:
        amplitudes = np.zeros(0, dtype=complex)
        gammas = np.zeros(0, dtype=float)

    tail_sigma = 0.0
    if with_tail:
        tail_var = coef_sq_total * _tail_integral(q, height)
        tail_sigma = math.sqrt(max(0.0, tail_var))

    return LimitRV(
        mean=mean,
        amplitudes=amplitudes,
        gammas=gammas,
        tail_sigma=tail_sigma,
        config=config,
        zero_height=height,
    )


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, chunk_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _chunk_spans(count: int):
    return [(i, min(CHUNK, count - i * CHUNK)) for i in range((count + CHUNK - 1) // CHUNK)]


def sample(rv: LimitRV, count: int, seed: int = DEFAULT_SEED,
           workers: int = 1) -> np.ndarray:
    """count i.i.d. draws of the truncated rv; deterministic for fixed seed."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    w_re = np.ascontiguousarray(rv.amplitudes.real)
    w_im = np.ascontiguousarray(rv.amplitudes.imag)
    nz = w_re.size
    out = np.empty(count, dtype=float)

    def work(span):
        # always generate the full chunk and truncate: a partial final chunk
        # must consume the stream exactly like a full one, or extending the
        # sample count would rewrite the draws it shares with a shorter run
        idx, size = span
        rng = _chunk_rng(seed, idx)
        u = rng.random((CHUNK, nz))
        g = rng.standard_normal(CHUNK)
        block = np.empty(CHUNK, dtype=float)
        kernels.mc_reduce(u, w_re, w_im, rv.mean, rv.tail_sigma, g, block)
        return idx, block[:size]

    spans = _chunk_spans(count)
    if workers <= 1:
        results = map(work, spans)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(work, spans)
    for idx, block in results:
        out[idx * CHUNK : idx * CHUNK + block.size] = block
    if workers > 1:
        pool.shutdown()
    return out


def _indicator_probability(
    rv: LimitRV,
    predicate,
    count: int,
    seed: int,
    workers: int,
) -> DensityEstimate:
    draws = sample(rv, count, seed=seed, workers=workers)
    hits = int(predicate(draws).sum())
    value, half = _wilson(hits, count)
    return DensityEstimate(value, half, count, rv.zero_height)


def density_delta(
    rv: LimitRV,
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> DensityEstimate:
    """P[X > 0]: the logarithmic density of the prime race lead."""
    return _indicator_probability(rv, lambda x: x > 0.0, count, seed, workers)


def density_delta2(
    rv: LimitRV,
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> DensityEstimate:
    """P[X < mean/2]: the semiprime race lead density, via reflection."""
    threshold = 0.5 * rv.mean
    return _indicator_probability(rv, lambda x: x < threshold, count, seed, workers)


def joint_probability(
    rvs: Sequence[LimitRV],
    pattern: Sequence[int],
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> DensityEstimate:
    """Probability that every semiprime race matches its requested sign.

    pattern[i] = +1 asks for race i leading (its reflected coordinate
    positive, i.e. X_i below its threshold), -1 for trailing. All rvs must
    come from the same modulus and the same zero set: the per-zero phases are
    shared across the pairs within each draw.
    """
    if not rvs:
        raise ValueError("need at least one rv")
    if len(pattern) != len(rvs):
        raise ValueError("pattern length must match the number of rvs")
    if any(p not in (-1, 1) for p in pattern):
        raise ValueError(f"pattern entries must be +-1, got {list(pattern)}")
    q = rvs[0].config.q
    gammas = rvs[0].gammas
    for rv in rvs[1:]:
        if rv.config.q != q:
            raise ValueError(
                f"joint sampling across moduli {q} and {rv.config.q} is undefined"
            )
        if rv.gammas.shape != gammas.shape or not np.array_equal(rv.gammas, gammas):
            raise ValueError("rvs must share one zero set for phase sharing")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")

    w_res = [np.ascontiguousarray(rv.amplitudes.real) for rv in rvs]
    w_ims = [np.ascontiguousarray(rv.amplitudes.imag) for rv in rvs]
    thresholds = [0.5 * rv.mean for rv in rvs]
    nz = gammas.size

    def work(span):
        # full-chunk generation, as in sample(): keeps the stream layout
        # identical whether the chunk is kept whole or truncated
        idx, size = span
        rng = _chunk_rng(seed, idx)
        u = rng.random((CHUNK, nz))
        ok = np.ones(CHUNK, dtype=bool)
        block = np.empty(CHUNK, dtype=float)
        for rv, w_re, w_im, thr, want in zip(rvs, w_res, w_ims, thresholds, pattern):
            g = rng.standard_normal(CHUNK)
            kernels.mc_reduce(u, w_re, w_im, rv.mean, rv.tail_sigma, g, block)
            lead = block < thr
            ok &= lead if want == 1 else ~lead
        return int(ok[:size].sum())

    spans = _chunk_spans(count)
    if workers <= 1:
        hits = sum(map(work, spans))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(work, spans))
    value, half = _wilson(hits, count)
    return DensityEstimate(value, half, count, rvs[0].zero_height)
