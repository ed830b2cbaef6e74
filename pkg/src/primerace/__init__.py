"""Prime and semiprime races in arithmetic progressions.

Counts primes and products of two primes across residue classes, normalizes
the resulting discrepancies, locates sign changes, and connects the observed
bias to Dirichlet L-function zeros: truncated explicit-formula predictions
on one side, limiting logarithmic densities via Monte Carlo on the other.
"""

__version__ = "0.1.0"

from .characters import DirichletCharacter, characters, phi
from .explicit import (
    TruncatedPrediction,
    predict_delta,
    predict_delta2,
    residual_mean_square,
    rms_misfit,
    window_mean,
    window_mean_square,
)
from .lfunctions import (
    UnsupportedCharacterError,
    hardy_z,
    hardy_z_block,
    l_value,
    zero_count_estimate,
)
from .model import (
    DensityEstimate,
    LimitRV,
    build_limit_rv,
    density_delta,
    density_delta2,
    joint_probability,
    sample,
)
from .race import (
    CountVector,
    RaceConfig,
    RaceSeries,
    accumulate,
    delta,
    delta2,
    empirical_log_density,
    fill_psi2,
    first_sign_change,
    log_grid,
    n_sqrt,
    normalize,
    run_race,
)
from .sieve import OmegaClass, base_primes, classify_segment, make_segment, segment_stream
from .zeros import ZeroFileError, ZeroList, find_zeros, load_zeros, save_zeros

__all__ = [
    "CountVector",
    "DensityEstimate",
    "DirichletCharacter",
    "LimitRV",
    "OmegaClass",
    "RaceConfig",
    "RaceSeries",
    "TruncatedPrediction",
    "UnsupportedCharacterError",
    "ZeroFileError",
    "ZeroList",
    "__version__",
    "accumulate",
    "base_primes",
    "build_limit_rv",
    "characters",
    "classify_segment",
    "delta",
    "delta2",
    "density_delta",
    "density_delta2",
    "empirical_log_density",
    "fill_psi2",
    "find_zeros",
    "first_sign_change",
    "hardy_z",
    "hardy_z_block",
    "joint_probability",
    "l_value",
    "load_zeros",
    "log_grid",
    "make_segment",
    "n_sqrt",
    "normalize",
    "phi",
    "predict_delta",
    "predict_delta2",
    "residual_mean_square",
    "rms_misfit",
    "run_race",
    "sample",
    "save_zeros",
    "segment_stream",
    "window_mean",
    "window_mean_square",
    "zero_count_estimate",
]
