"""Unbiased estimation of f(m) and its gradient from unbiased draws of m,
using randomly truncated Taylor series."""

from .errors import DebiasError, DomainError, NonFiniteEstimate, ResourceExceeded
from .series import (
    EstimatorKind,
    Expansion,
    FunctionKind,
    GradientEstimate,
    SumEstimate,
    TruncationLaw,
    coefficient_estimates,
    cycling_coeffs,
    cycling_gradient_coeffs,
    gradient_sum_estimate,
    mvue_coeffs,
    sample_truncation,
    simple_coeffs,
    simple_gradient_coeffs,
    sum_estimate,
    survival,
    taylor_coefficient,
)
from .sources import (
    ConstantSource,
    FunctionPairSource,
    FunctionSource,
    GaussianSource,
    PairStreamSource,
    StreamSource,
)
from .streams import map_replicates, replicate_rng, replicate_seed
from .tuning import (
    PilotSummary,
    WnvParams,
    beta_squared,
    bootstrap_x0,
    choose_p,
    pilot_moments,
    tune,
    wnv_bound,
    wnv_minimize,
    x0_star,
)

__version__ = "0.1.0"
