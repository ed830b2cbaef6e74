"""Truncated explicit-formula predictions for the normalized races.

With zeros up to height T0 for every nonprincipal character mod q, the
normalized prime race difference is predicted by

    predict_delta(x) = mean - kappa * 2 Re sum_{chi} sum_{0 < gamma <= T0}
                           (conj chi(a) - conj chi(b)) m(gamma)
                           x^(i gamma) / (1/2 + i gamma)

with mean = (n_sqrt(q,b) - n_sqrt(q,a)) / phi(q). The prefactor kappa on the
zero sum is 1/phi(q); a kappa=1 variant is kept available because the two
normalizations are easy to conflate, and the regression test selects the one
that actually fits the sieved data (the 1/phi(q) choice wins by a wide
margin).

The semiprime race prediction is the reflection of the same oscillation:

    predict_delta2(x) = -mean/2 + (1/phi(q)) * 2 Re sum ... m(gamma)^2 ...

so the two predictions added together cancel the zero sums term by term
(when kappa = 1/phi(q) and all multiplicities are 1), leaving the constant
mean/2 - that cancellation is exactly why the combined residual decays.

Zeros are truncated at the requested T0 with no further thinning; the
admissible-height refinements that matter for proofs change nothing at
double precision.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .characters import characters
from .race import RaceConfig, RaceSeries, n_sqrt
from .zeros import ZeroList


@dataclass
class TruncatedPrediction:
    """A prediction series on a grid of x values."""

    x: np.ndarray
    values: np.ndarray
    zero_height: float
    kappa: float
    config: RaceConfig


def _collect_terms(
    config: RaceConfig,
    zero_lists: Sequence[ZeroList],
    T0: float,
    weight_power: int,
):
    """Per-zero complex coefficients c so the oscillation is
    2 Re sum c * x^(i gamma); validates coverage up to T0."""
    q, a, b = config.q, config.a, config.b
    by_char = {}
    for zl in zero_lists:
        if zl.character.q != q:
            raise ValueError(f"zero list for modulus {zl.character.q} in a mod-{q} race")
        by_char[zl.character.index] = zl
    needed = [chi for chi in characters(q) if not chi.is_principal]
    missing = [chi.index for chi in needed if chi.index not in by_char]
    if missing:
        raise ValueError(f"missing zero lists for character indices {missing} mod {q}")
    short = [
        chi.index for chi in needed if by_char[chi.index].height < T0 - 1e-9
    ]
    if short:
        raise ValueError(
            f"zero lists for character indices {short} stop below T0={T0}; "
            "the truncated sum would be silently incomplete"
        )

    coefs, gammas = [], []
    for chi in needed:
        zl = by_char[chi.index]
        keep = zl.gammas <= T0
        g = zl.gammas[keep]
        mult = zl.multiplicities[keep].astype(float) ** weight_power
        cchar = np.conj(chi.value(a)) - np.conj(chi.value(b))
        if abs(cchar) == 0.0:
            continue
        coefs.append(cchar * mult / (0.5 + 1j * g))
        gammas.append(g)
    if coefs:
        return np.concatenate(coefs), np.concatenate(gammas)
    return np.zeros(0, dtype=complex), np.zeros(0, dtype=float)


def _oscillation(x: np.ndarray, coefs: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """2 Re sum_j coefs[j] * x^(i gamma_j), vectorized over the grid."""
    if gammas.size == 0:
        return np.zeros(x.size, dtype=float)
    logx = np.log(x.astype(float))
    phases = np.exp(1j * np.multiply.outer(logx, gammas))
    return 2.0 * (phases @ coefs).real


def predict_delta(
    x: Sequence[int] | np.ndarray,
    config: RaceConfig,
    zero_lists: Sequence[ZeroList],
    T0: float,
    kappa: float | None = None,
) -> TruncatedPrediction:
    """Truncated prediction of delta_norm on the grid x.

    kappa=None means the default 1/phi(q) prefactor on the zero sum; pass
    kappa=1.0 for the unnormalized variant (kept for the regression test
    that discriminates the two).
    """
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0 or np.any(x < 3):
        raise ValueError("prediction grid must be nonempty with x >= 3")
    if kappa is None:
        kappa = 1.0 / config.phi_q
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    coefs, gammas = _collect_terms(config, zero_lists, T0, weight_power=1)
    mean = (n_sqrt(config.q, config.b) - n_sqrt(config.q, config.a)) / config.phi_q
    values = mean - kappa * _oscillation(x, coefs, gammas)
    return TruncatedPrediction(x, values, float(T0), float(kappa), config)


def predict_delta2(
    x: Sequence[int] | np.ndarray,
    config: RaceConfig,
    zero_lists: Sequence[ZeroList],
    T0: float,
) -> TruncatedPrediction:
    """Truncated prediction of delta2_norm on the grid x (reflection side).

    Zero multiplicities enter squared here; the prefactor is fixed at
    1/phi(q), matching the reflection that pairs the two races.
    """
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0 or np.any(x < 3):
        raise ValueError("prediction grid must be nonempty with x >= 3")
    coefs, gammas = _collect_terms(config, zero_lists, T0, weight_power=2)
    kappa = 1.0 / config.phi_q
    mean = (n_sqrt(config.q, config.b) - n_sqrt(config.q, config.a)) / config.phi_q
    values = -0.5 * mean + kappa * _oscillation(x, coefs, gammas)
    return TruncatedPrediction(x, values, float(T0), kappa, config)


def rms_misfit(series: RaceSeries, prediction: TruncatedPrediction) -> float:
    """Root mean square of measured minus predicted delta_norm on the
    prediction's grid (which must be a subset of the series grid)."""
    pos = {int(v): i for i, v in enumerate(series.x)}
    idx = []
    for v in prediction.x:
        if int(v) not in pos:
            raise ValueError(f"prediction point x={int(v)} not in the measured grid")
        idx.append(pos[int(v)])
    measured = series.delta_norm[idx]
    return float(np.sqrt(np.mean((measured - prediction.values) ** 2)))


def residual_mean_square(y: np.ndarray, g: np.ndarray, Y: float) -> float:
    """Trapezoid estimate of (1/Y) * integral_1^Y |g(y)|^2 dy.

    The grid must cover [1, Y]; endpoints are linearly interpolated. This is
    the quadratic-mean functional whose decay certifies that the combined
    race residual is genuinely small, not just small on average.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if y.ndim != 1 or y.shape != g.shape or y.size < 2:
        raise ValueError("need matching 1-d arrays with at least two points")
    if np.any(np.diff(y) <= 0):
        raise ValueError("y grid must be strictly ascending")
    Y = float(Y)
    if not (y[0] <= 1.0 and Y <= y[-1] and Y > 1.0):
        raise ValueError(
            f"grid [{y[0]}, {y[-1]}] does not cover the window [1, {Y}]"
        )
    return _window_integral(y, g * g, 1.0, Y) / Y


def window_mean_square(y: np.ndarray, g: np.ndarray, y0: float, y1: float) -> float:
    """Mean of |g|^2 over [y0, y1] by trapezoid, for windowed diagnostics."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (y[0] <= y0 < y1 <= y[-1]):
        raise ValueError(
            f"grid [{y[0]}, {y[-1]}] does not cover the window [{y0}, {y1}]"
        )
    return _window_integral(y, g * g, y0, y1) / (y1 - y0)


def window_mean(y: np.ndarray, g: np.ndarray, y0: float, y1: float) -> float:
    """Mean of g over [y0, y1] by trapezoid."""
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (y[0] <= y0 < y1 <= y[-1]):
        raise ValueError(
            f"grid [{y[0]}, {y[-1]}] does not cover the window [{y0}, {y1}]"
        )
    return _window_integral(y, g, y0, y1) / (y1 - y0)


def _window_integral(y: np.ndarray, f: np.ndarray, y0: float, y1: float) -> float:
    """Trapezoid integral of samples f over [y0, y1] with interpolated cuts."""
    inner = (y > y0) & (y < y1)
    ys = np.concatenate(([y0], y[inner], [y1]))
    f0 = np.interp(y0, y, f)
    f1 = np.interp(y1, y, f)
    fs = np.concatenate(([f0], f[inner], [f1]))
    return float(np.trapezoid(fs, ys))
