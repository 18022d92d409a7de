"""Choosing the expansion point and the truncation law from a pilot run.

The pipeline: estimate ``(m, var)`` from ``n0`` pilot draws, target the
expansion point minimising ``beta^2 = var/x0^2 + (m/x0 - 1)^2``, guard it
from below with a bootstrap upper confidence bound on ``x0_min`` (the
smallest admissible point, half of the optimum), then set
``p = min(1 - beta2_hat, 1/(n0 + 1))`` so that ``E[R]`` matches the pilot
size. ``wnv_bound``/``wnv_minimize`` expose the cost-aware alternative.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError
from .series import EstimatorKind

DEFAULT_ALPHA = 0.01
DEFAULT_N_BOOT = 2000
WNV_EPS = 1e-9


@dataclass(frozen=True)
class PilotSummary:
    n0: int
    m_hat: float
    var_hat: float
    x0_star_hat: float
    x0_min_hat: float
    bootstrap_bound: float
    x0_chosen: float
    beta2_hat: float
    p_chosen: float
    alpha: float = DEFAULT_ALPHA
    n_boot: int = DEFAULT_N_BOOT

    def to_dict(self) -> dict:
        return asdict(self)


def pilot_moments(xs) -> tuple[float, float]:
    """Sample mean and unbiased (n-1) sample variance."""
    x = np.asarray(xs, dtype=float)
    if x.size < 2:
        raise DomainError(f"pilot run needs at least 2 samples, got {x.size}")
    return float(x.mean()), float(x.var(ddof=1))


def x0_star(m: float, var: float) -> float:
    """Minimiser of beta^2 over the expansion point: ``(m^2 + var) / m``."""
    if m <= 0:
        raise DomainError(f"expansion-point tuning requires m > 0, got m = {m}")
    return (m * m + var) / m


def beta_squared(m: float, var: float, x0: float) -> float:
    if x0 == 0:
        raise DomainError("x0 must be non-zero")
    return var / x0**2 + (m / x0 - 1.0) ** 2


def choose_p(beta2_hat: float, n0: int) -> float:
    if beta2_hat >= 1.0:
        raise DomainError(f"beta^2 = {beta2_hat} >= 1: no geometric law gives finite variance")
    if n0 < 1:
        raise DomainError("n0 must be at least 1")
    return min(1.0 - beta2_hat, 1.0 / (n0 + 1))


def _percentile_index(alpha: float, n_boot: int) -> int:
    # order statistic ceil((1 - alpha) * n_boot), 1-based
    return min(n_boot, max(1, math.ceil((1.0 - alpha) * n_boot))) - 1


def bootstrap_x0(
    xs,
    alpha: float = DEFAULT_ALPHA,
    n_boot: int = DEFAULT_N_BOOT,
    rng: np.random.Generator | None = None,
) -> PilotSummary:
    """Pilot-run tuning of the expansion point and the geometric parameter.

    Parameters
    ----------
    xs : array_like
        Pilot draws, at least two.
    alpha : float
        The chosen ``x0`` exceeds the bootstrap ``(1 - alpha)`` percentile of
        the resampled ``x0_min`` estimates.
    n_boot : int
        Number of bootstrap resamples.
    rng : numpy.random.Generator

    Returns
    -------
    PilotSummary
        ``x0_chosen = max(x0_star_hat, bootstrap_bound)`` plus the plug-in
        ``beta^2`` at that point and the resulting ``p``.

    Raises
    ------
    DomainError
        If the pilot mean, or the mean of any resample, is not positive.
    """
    x = np.asarray(xs, dtype=float)
    m_hat, var_hat = pilot_moments(x)
    if m_hat <= 0:
        raise DomainError(f"pilot mean m_hat = {m_hat} <= 0; tuning assumes m > 0")
    star = x0_star(m_hat, var_hat)

    rng = np.random.default_rng() if rng is None else rng
    n0 = x.size
    resamples = x[rng.integers(0, n0, size=(n_boot, n0))]
    m_b = resamples.sum(axis=1) / n0
    if np.any(m_b <= 0):
        bad = int(np.sum(m_b <= 0))
        raise DomainError(f"{bad} of {n_boot} bootstrap resamples have mean <= 0; tuning assumes m > 0")
    centred = resamples - m_b[:, None]
    v_b = np.einsum("ij,ij->i", centred, centred) / (n0 - 1)
    x0_min_b = (m_b**2 + v_b) / (2.0 * m_b)
    idx = _percentile_index(alpha, n_boot)
    bound = float(np.partition(x0_min_b, idx)[idx])

    chosen = max(star, bound)
    beta2 = beta_squared(m_hat, var_hat, chosen)
    return PilotSummary(
        n0=n0,
        m_hat=m_hat,
        var_hat=var_hat,
        x0_star_hat=star,
        x0_min_hat=star / 2.0,
        bootstrap_bound=bound,
        x0_chosen=chosen,
        beta2_hat=beta2,
        p_chosen=choose_p(beta2, n0),
        alpha=alpha,
        n_boot=n_boot,
    )


def tune(source, n0: int, rng: np.random.Generator, alpha: float = DEFAULT_ALPHA,
         n_boot: int = DEFAULT_N_BOOT) -> PilotSummary:
    """Draw ``n0`` pilot samples from ``source`` and run ``bootstrap_x0``."""
    return bootstrap_x0(source.draw(n0, rng), alpha=alpha, n_boot=n_boot, rng=rng)


@dataclass(frozen=True)
class WnvParams:
    estimator_kind: EstimatorKind
    n0: int
    beta0: float
    beta: float
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.beta0 < 1.0:
            raise DomainError("beta0 must lie in [0, 1)")
        if not self.beta0 <= self.beta < 1.0:
            raise DomainError("need beta0 <= beta < 1")
        if self.c <= 0:
            raise DomainError("c must be positive")

    @classmethod
    def from_squares(cls, kind, n0, beta0_sq, beta_sq, c=1.0) -> "WnvParams":
        return cls(EstimatorKind(kind), n0, math.sqrt(beta0_sq), math.sqrt(beta_sq), c)


def wnv_bound(params: WnvParams, p: float) -> float:
    """Upper bound on ``(n0 + E[R]) * var[f_hat]`` at geometric parameter ``p``.

    Truncation part ``c^2 b0^2/(1-b0)^2 * p/(1-p-b0^2)`` plus, for the simple
    estimator ``c^2 (1+b)/(1-b) * (1-p)/(1-p-b^2)``, and for the cycling
    estimator ``4 c^2 p log(1/p)/(1-p-b^2)^2 * (b^2 + 2 b0/(1-b0^2))``.
    """
    b0, b, c2 = params.beta0, params.beta, params.c**2
    if not 0.0 < p < 1.0 - b * b:
        raise DomainError(f"p = {p} outside the admissible interval (0, {1.0 - b * b})")
    work = params.n0 + (1.0 - p) / p
    truncation = b0**2 / (1.0 - b0) ** 2 * p / (1.0 - p - b0**2)
    if params.estimator_kind is EstimatorKind.SIMPLE:
        sampling = (1.0 + b) / (1.0 - b) * (1.0 - p) / (1.0 - p - b * b)
    elif params.estimator_kind is EstimatorKind.CYCLING:
        sampling = (4.0 * p * math.log(1.0 / p) / (1.0 - p - b * b) ** 2
                    * (b * b + 2.0 * b0 / (1.0 - b0 * b0)))
    else:
        raise DomainError("work-normalised variance bounds exist for simple and cycling only")
    return c2 * work * (truncation + sampling)


def wnv_minimize(params: WnvParams, eps: float = WNV_EPS, xatol: float = 1e-6) -> float:
    """Geometric parameter minimising ``wnv_bound`` on ``[eps, 1 - beta^2 - eps]``."""
    hi = 1.0 - params.beta**2 - eps
    res = minimize_scalar(lambda p: wnv_bound(params, p), bounds=(eps, hi),
                          method="bounded", options={"xatol": xatol})
    return float(res.x)
