"""Dirichlet L-values and the rotated (real) critical-line function.

Built-in evaluation covers the real nonprincipal characters mod 3 and mod 4,
via accelerated alternating series:

    mod 4:  L(s) = sum_{k>=0} (-1)^k (2k+1)^(-s)
    mod 3:  (1 + 2^(1-s)) L(s) = sum_{k>=0} (-1)^k [(3k+1)^(-s) + (3k+2)^(-s)]

The second identity follows by splitting the L-series over even and odd n.
Acceleration uses Chebyshev-weighted partial sums (the classic alternating
series trick): the approximation is sum (-1)^k c_k a_k with weights
c_k = (d_n - d_k)/d_n derived from (3 + sqrt 8)^n growth, giving error
roughly (3 + sqrt 8)^(-n) e^(pi |t| / 2). The weights are computed through a
log-gamma softmax so no intermediate overflows, and cached per term count.

Every other character is out of scope here: callers get an error telling
them to ingest precomputed zeros instead.

hardy_z rotates L(1/2 + it) onto the real axis with the usual gamma-factor
phase; its sign changes locate the zeros. The rotation only needs the
argument of Gamma, so the small complex log-gamma here (Stirling plus
argument lifting) is enough, tested against independent references.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .characters import DirichletCharacter

LN_RHO = math.log(3.0 + math.sqrt(8.0))  # convergence rate of the weights
MAX_IMAG = 500.0

# (step, offsets, needs_two_factor) per supported modulus
_SERIES = {
    4: (2, (1,), False),
    3: (3, (1, 2), True),
}


class UnsupportedCharacterError(ValueError):
    """Raised when no built-in series exists for the character."""


def _require_builtin(chi: DirichletCharacter) -> int:
    if chi.q in _SERIES and chi.A_chi and chi.is_primitive:
        return chi.q
    raise UnsupportedCharacterError(
        f"no built-in L-series for character index {chi.index} mod {chi.q}; "
        "compute zeros externally and ingest them from a zero file"
    )


@lru_cache(maxsize=128)
def _weights(n: int) -> np.ndarray:
    """Acceleration weights c_0..c_{n-1}, all in (0, 1], via suffix-sum
    ratios of the d_k increments in log space."""
    i = np.arange(n + 1, dtype=float)
    logw = np.array(
        [
            math.lgamma(n + k) - math.lgamma(n - k + 1) - math.lgamma(2 * k + 1)
            for k in range(n + 1)
        ]
    )
    logw += i * math.log(4.0)
    logw -= logw.max()
    w = np.exp(logw)
    total = w.sum()
    suffix = np.cumsum(w[::-1])[::-1]  # suffix[k] = sum_{i>=k} w_i
    return (suffix[1:] / total).astype(float)


def _terms_needed(t: float, sigma: float, tol: float = 1e-13) -> int:
    t = abs(float(t))
    extra = max(0.0, math.lgamma(sigma)) if sigma < 1.0 else 0.0
    n = (math.log(1.0 / tol) + 0.5 * math.pi * t + 0.5 * math.log1p(t) + extra + 3.5)
    return int(n / LN_RHO) + 10


def _alt_sum_block(s: np.ndarray, q: int, n: int) -> np.ndarray:
    """The accelerated alternating sum at each s (1-d complex array)."""
    step, offsets, _ = _SERIES[q]
    c = _weights(n)
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    coeff = sign * c
    out = np.zeros(s.shape, dtype=complex)
    for off in offsets:
        logx = np.log(step * np.arange(n, dtype=float) + off)
        out += np.exp(np.multiply.outer(-s, logx)) @ coeff
    return out


def l_value_block(t: np.ndarray, chi: DirichletCharacter,
                  sigma: float = 0.5) -> np.ndarray:
    """L(sigma + it) for a block of ordinates t, vectorized."""
    q = _require_builtin(chi)
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return np.zeros(0, dtype=complex)
    tmax = float(np.abs(t).max())
    if tmax > MAX_IMAG:
        raise ValueError(f"|Im s| capped at {MAX_IMAG}, got {tmax}")
    n = _terms_needed(tmax, sigma)
    s = sigma + 1j * t
    raw = _alt_sum_block(s, q, n)
    _, _, two_factor = _SERIES[q]
    if two_factor:
        denom = 1.0 + np.exp((1.0 - s) * math.log(2.0))
        bad = np.abs(denom) < 1e-8
        if bad.any():
            raise ValueError(
                "evaluation point too close to a zero of the series "
                "rearrangement factor 1 + 2^(1-s); perturb s"
            )
        raw = raw / denom
    return raw


def l_value(s: complex, chi: DirichletCharacter) -> complex:
    """L(s, chi) for the built-in characters, Re s > 0, |Im s| <= 500.

    Absolute accuracy is 1e-10 or better on that strip. Unsupported
    characters raise UnsupportedCharacterError pointing at zero ingestion.
    """
    s = complex(s)
    if s.real <= 0:
        raise ValueError(f"l_value requires Re s > 0, got {s}")
    _require_builtin(chi)
    block = l_value_block(np.array([s.imag]), chi, sigma=s.real)
    return complex(block[0])


# ---------------------------------------------------------------------------
# complex log-gamma (Re z > 0), enough for the rotation phase

_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)


def loggamma(z):
    """Principal-branch-consistent log Gamma on Re z > 0, scalar or array.

    Small arguments are lifted with the recurrence before applying Stirling;
    the imaginary part is what hardy_z consumes (any 2 pi k offset cancels in
    the exponential).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    if np.any(z.real <= 0):
        raise ValueError("loggamma implemented for Re z > 0 only")
    acc = np.zeros_like(z)
    for _ in range(12):
        small = np.abs(z) < 10.0
        if not small.any():
            break
        acc[small] -= np.log(z[small])
        z[small] += 1.0
    u = 1.0 / z
    u2 = u * u
    corr = np.zeros_like(z)
    up = u
    for coef in _STIRLING:
        corr += coef * up
        up = up * u2
    out = (z - 0.5) * np.log(z) - z + 0.5 * math.log(2.0 * math.pi) + corr + acc
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# rotated critical-line function and zero counting

def _phase(t: np.ndarray, chi: DirichletCharacter) -> np.ndarray:
    a = 0 if chi.parity == 1 else 1
    z = (0.5 + a) / 2.0 + 0.5j * t
    return 0.5 * t * math.log(chi.q / math.pi) + loggamma(z).imag


def rotated_l_block(t: np.ndarray, chi: DirichletCharacter) -> np.ndarray:
    """exp(i theta(t)) L(1/2 + it): real up to roundoff for the built-ins."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * _phase(t, chi)) * l_value_block(t, chi)


def hardy_z_block(t: np.ndarray, chi: DirichletCharacter,
                  block: int = 4096) -> np.ndarray:
    """Real rotated L-values for an ascending array of ordinates.

    Chunked so the series length adapts to each block's top ordinate instead
    of the global maximum.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty(t.size, dtype=float)
    for i in range(0, t.size, block):
        out[i : i + block] = rotated_l_block(t[i : i + block], chi).real
    return out


def hardy_z(t: float, chi: DirichletCharacter) -> float:
    """The rotated L-function at a single ordinate; |hardy_z| = |L(1/2+it)|."""
    return float(rotated_l_block(np.array([float(t)]), chi).real[0])


def zero_count_estimate(chi: DirichletCharacter, T: float) -> float:
    """Expected number of zeros with 0 < gamma <= T for a primitive character:
    (T / 2 pi) log(qT / (2 pi e)). Accurate to O(log T)."""
    if not chi.is_primitive:
        raise ValueError(
            f"zero_count_estimate needs a primitive character, index "
            f"{chi.index} mod {chi.q} has conductor {chi.conductor}"
        )
    T = float(T)
    if T <= 0:
        return 0.0
    val = T / (2.0 * math.pi) * math.log(chi.q * T / (2.0 * math.pi * math.e))
    return max(0.0, val)
