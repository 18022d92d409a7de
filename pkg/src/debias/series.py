"""Randomly truncated Taylor series estimators.

Given i.i.d. draws with mean ``m`` the sum estimator

    f_hat = sum_{k=0}^{R} gamma_k * U_{R,k} / P(R >= k)

is unbiased for ``f(m) = sum_k gamma_k (m/x0 - 1)^k`` whenever each
``U_{r,k}`` is unbiased for ``(m/x0 - 1)^k`` and independent of ``R``. Three
constructions of ``U_{r,k}`` are provided: the simple product of the first
``k`` centred samples, its average over circular shifts of the sample
window (cycling), and the U-statistic over all ``k``-subsets (MVUE).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import cycling_gradient_kernel, cycling_kernel, mvue_kernel
from .errors import DomainError, NonFiniteEstimate, ResourceExceeded

DEFAULT_R_MAX = 10**6
_CUSTOM_PROBE = 64


class FunctionKind(str, Enum):
    LOG = "log"
    RECIPROCAL = "reciprocal"
    CUSTOM = "custom"


class EstimatorKind(str, Enum):
    SIMPLE = "simple"
    CYCLING = "cycling"
    MVUE = "mvue"


def _as_kind(kind) -> EstimatorKind:
    try:
        return EstimatorKind(kind)
    except ValueError:
        raise ValueError(f"unknown estimator kind {kind!r}") from None


class CoefficientTable:
    """Finite table of coefficients ``gamma_0..gamma_K``; no extrapolation."""

    def __init__(self, gammas: Sequence[float]):
        self.gammas = np.asarray(gammas, dtype=float)

    def __len__(self):
        return self.gammas.size

    def __call__(self, k: int) -> float:
        if k < 0 or k >= self.gammas.size:
            raise DomainError(
                f"coefficient gamma_{k} requested but the table only defines k=0..{self.gammas.size - 1}"
            )
        return float(self.gammas[k])


@dataclass(frozen=True)
class Expansion:
    """Taylor expansion ``f(m) = sum_k gamma_k (m/x0 - 1)^k``.

    ``gamma_k = f^{(k)}(x0) x0^k / k!`` and ``c`` bounds ``|gamma_k|`` for
    ``k >= 1``. Use the ``log``, ``reciprocal`` and ``custom`` constructors.
    """

    kind: FunctionKind
    x0: float
    c: float
    custom_coeffs: Optional[Callable[[int], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.x0) or self.x0 == 0.0:
            raise DomainError("expansion point x0 must be finite and non-zero")
        if self.kind in (FunctionKind.LOG, FunctionKind.RECIPROCAL) and self.x0 <= 0:
            raise DomainError(f"{self.kind.value} expansion requires x0 > 0, got {self.x0}")
        if self.c < 0:
            raise DomainError("coefficient bound c must be non-negative")
        if self.kind is FunctionKind.CUSTOM:
            if self.custom_coeffs is None:
                raise DomainError("custom expansion needs a coefficient accessor")
            self._check_custom_bound()

    @classmethod
    def log(cls, x0: float) -> "Expansion":
        return cls(FunctionKind.LOG, float(x0), 1.0)

    @classmethod
    def reciprocal(cls, x0: float) -> "Expansion":
        return cls(FunctionKind.RECIPROCAL, float(x0), 1.0 / float(x0))

    @classmethod
    def custom(cls, x0: float, coeffs, c: float) -> "Expansion":
        """``coeffs`` is a callable ``k -> gamma_k`` or a finite sequence.

        The bound ``c`` must be supplied; it is spot-checked, not inferred.
        """
        if not callable(coeffs):
            coeffs = CoefficientTable(coeffs)
        return cls(FunctionKind.CUSTOM, float(x0), float(c), coeffs)

    def _check_custom_bound(self):
        for k in range(1, _CUSTOM_PROBE + 1):
            try:
                g = self.custom_coeffs(k)
            except DomainError:
                break
            if abs(g) > self.c * (1 + 1e-12):
                raise DomainError(f"|gamma_{k}| = {abs(g)} exceeds the declared bound c = {self.c}")

    def coefficient(self, k: int) -> float:
        if k < 0:
            raise ValueError("k must be non-negative")
        if self.kind is FunctionKind.LOG:
            return math.log(self.x0) if k == 0 else (-1.0) ** (k - 1) / k
        if self.kind is FunctionKind.RECIPROCAL:
            return (-1.0) ** k / self.x0
        return float(self.custom_coeffs(k))

    def coefficients(self, n: int) -> np.ndarray:
        """``gamma_0..gamma_n`` as an array."""
        k = np.arange(n + 1)
        if self.kind is FunctionKind.LOG:
            out = np.empty(n + 1)
            out[0] = math.log(self.x0)
            kk = k[1:]
            out[1:] = np.where(kk % 2 == 1, 1.0, -1.0) / kk
            return out
        if self.kind is FunctionKind.RECIPROCAL:
            return np.where(k % 2 == 0, 1.0, -1.0) / self.x0
        return np.array([self.custom_coeffs(int(i)) for i in k], dtype=float)

    def function_value(self, m: float) -> float:
        """Exact ``f(m)`` for the built-in kinds."""
        if self.kind is FunctionKind.LOG:
            return math.log(m)
        if self.kind is FunctionKind.RECIPROCAL:
            return 1.0 / m
        raise DomainError("function value unknown for custom expansions")


@dataclass(frozen=True)
class TruncationLaw:
    """Geometric(p) on {0, 1, ...}: P(R = k) = (1-p)^k p, P(R >= k) = (1-p)^k."""

    p: float
    r_max: int = DEFAULT_R_MAX

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"geometric parameter must lie in (0, 1), got {self.p}")

    @classmethod
    def from_mean(cls, mean: float, r_max: int = DEFAULT_R_MAX) -> "TruncationLaw":
        return cls(1.0 / (mean + 1.0), r_max)

    @property
    def mean(self) -> float:
        return (1.0 - self.p) / self.p

    @property
    def variance(self) -> float:
        return (1.0 - self.p) / self.p**2

    def survival(self, k):
        return (1.0 - self.p) ** np.asarray(k) if np.ndim(k) else (1.0 - self.p) ** k

    def mass(self, k):
        return self.survival(k) * self.p

    def sample(self, rng: np.random.Generator) -> int:
        # numpy's geometric lives on {1, 2, ...}
        r = int(rng.geometric(self.p)) - 1
        if r > self.r_max:
            raise ResourceExceeded(f"truncation level R={r} exceeds r_max={self.r_max}")
        return r


def taylor_coefficient(expansion: Expansion, k: int) -> float:
    return expansion.coefficient(k)


def survival(law: TruncationLaw, k: int) -> float:
    return law.survival(k)


def sample_truncation(law: TruncationLaw, rng: np.random.Generator) -> int:
    return law.sample(rng)


def _centred(xs, x0: float) -> np.ndarray:
    if x0 == 0:
        raise DomainError("x0 must be non-zero")
    return np.asarray(xs, dtype=float) / x0 - 1.0


def simple_coeffs(xs, x0: float) -> np.ndarray:
    """``u[k] = prod_{i<=k} (x_i/x0 - 1)``, with ``u[0] = 1``."""
    y = _centred(xs, x0)
    u = np.empty(y.size + 1)
    u[0] = 1.0
    np.cumprod(y, out=u[1:])
    return u


def cycling_coeffs(xs, x0: float) -> np.ndarray:
    """Simple products averaged over the ``r`` circular shifts of the window."""
    return cycling_kernel(np.ascontiguousarray(_centred(xs, x0)))


def mvue_coeffs(xs, x0: float) -> np.ndarray:
    """U-statistic: mean of ``prod (x_i/x0 - 1)`` over all ``k``-subsets.

    Computed in O(r^2) by the elementary-symmetric recursion, normalised by
    the binomial coefficient at each step. For r beyond a few hundred the
    alternating-sign sums can cancel catastrophically.
    """
    return mvue_kernel(np.ascontiguousarray(_centred(xs, x0)))


_COEFFS = {
    EstimatorKind.SIMPLE: simple_coeffs,
    EstimatorKind.CYCLING: cycling_coeffs,
    EstimatorKind.MVUE: mvue_coeffs,
}


def coefficient_estimates(kind, xs, x0: float) -> np.ndarray:
    return _COEFFS[_as_kind(kind)](xs, x0)


def simple_gradient_coeffs(xs, gs, x0: float) -> np.ndarray:
    """``W[k] = G_k prod_{i<k} (x_i/x0 - 1)`` for ``k = 1..r``; row 0 is zero."""
    y = _centred(xs, x0)
    g = np.asarray(gs, dtype=float).reshape(y.size, -1)
    lead = np.ones(y.size)
    if y.size > 1:
        np.cumprod(y[:-1], out=lead[1:])
    w = np.zeros((y.size + 1, g.shape[1]))
    w[1:] = g * lead[:, None]
    return w


def cycling_gradient_coeffs(xs, gs, x0: float) -> np.ndarray:
    """Circular-shift average of the simple gradient windows.

    Each window of length ``k`` pairs the ``G`` at its last index with the
    ``k - 1`` preceding centred ``X`` factors.
    """
    y = np.ascontiguousarray(_centred(xs, x0))
    g = np.ascontiguousarray(np.asarray(gs, dtype=float).reshape(y.size, -1))
    return cycling_gradient_kernel(y, g)


_GRAD_COEFFS = {
    EstimatorKind.SIMPLE: simple_gradient_coeffs,
    EstimatorKind.CYCLING: cycling_gradient_coeffs,
}


@dataclass(frozen=True)
class SumEstimate:
    value: float
    r: int
    samples_used: int
    seed: Optional[int] = None


@dataclass(frozen=True)
class GradientEstimate:
    value: np.ndarray
    r: int
    samples_used: int
    seed: Optional[int] = None


def assemble_sum(expansion: Expansion, law: TruncationLaw, u: np.ndarray) -> float:
    """``sum_k gamma_k u[k] / P(R >= k)`` over the supplied coefficient estimates."""
    r = u.size - 1
    gammas = expansion.coefficients(r)
    weights = (1.0 - law.p) ** -np.arange(r + 1, dtype=float)
    return float(np.dot(gammas * weights, u))


def sum_estimate(
    expansion: Expansion,
    law: TruncationLaw,
    kind,
    source,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> SumEstimate:
    """One draw of the randomly truncated sum estimator of ``f(m)``."""
    kind = _as_kind(kind)
    r = law.sample(rng)
    if r == 0:
        value = expansion.coefficient(0)
    else:
        xs = source.draw(r, rng)
        # overflow is reported below as NonFiniteEstimate
        with np.errstate(over="ignore", invalid="ignore"):
            value = assemble_sum(expansion, law, _COEFFS[kind](xs, expansion.x0))
    if not math.isfinite(value):
        raise NonFiniteEstimate(f"sum estimate is not finite (R={r}, value={value})")
    return SumEstimate(value, r, r, seed)


def gradient_sum_estimate(
    expansion: Expansion,
    law: TruncationLaw,
    kind,
    pair_source,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> GradientEstimate:
    """One draw of the sum estimator of ``grad_theta f(m(theta))``.

    ``R`` is Geometric(p) conditioned on ``R >= 1`` (equivalently ``1 +
    Geometric(p)``), so term ``k`` is weighted by ``1 / (1-p)^(k-1)``.
    """
    kind = _as_kind(kind)
    if kind not in _GRAD_COEFFS:
        raise ValueError(f"gradient estimation supports simple and cycling, not {kind.value}")
    r = law.sample(rng) + 1
    if r > law.r_max:
        raise ResourceExceeded(f"truncation level R={r} exceeds r_max={law.r_max}")
    xs, gs = pair_source.draw_pairs(r, rng)
    k = np.arange(1, r + 1, dtype=float)
    gammas = expansion.coefficients(r)[1:]
    with np.errstate(over="ignore", invalid="ignore"):
        w = _GRAD_COEFFS[kind](xs, gs, expansion.x0)
        scale = k * gammas / expansion.x0 * (1.0 - law.p) ** -(k - 1.0)
        value = scale @ w[1:]
    if not np.all(np.isfinite(value)):
        raise NonFiniteEstimate(f"gradient estimate is not finite (R={r})")
    return GradientEstimate(value, r, r, seed)
