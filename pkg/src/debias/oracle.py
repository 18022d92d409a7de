"""Closed-form moments, variance limits and bounds for the sum estimators.

These are ground truth for the property tests and are also handy for
diagnostics (see ``debias oracle``). Moments of the centred samples
``Y = X/x0 - 1`` are parameterised by ``m_tilde = E[Y]`` and
``beta2 = E[Y^2] = var/x0^2 + m_tilde^2``; the ratio ``rho = beta2 /
m_tilde^2`` only appears in docstrings because it is singular at ``m = x0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .series import Expansion, TruncationLaw


@dataclass(frozen=True)
class MomentParams:
    m: float
    var: float
    x0: float

    def __post_init__(self):
        if self.var < 0:
            raise DomainError("variance must be non-negative")
        if self.x0 == 0:
            raise DomainError("x0 must be non-zero")

    @property
    def m_tilde(self) -> float:
        return self.m / self.x0 - 1.0

    @property
    def beta0(self) -> float:
        return abs(self.m_tilde)

    @property
    def beta2(self) -> float:
        return self.var / self.x0**2 + self.m_tilde**2

    @property
    def rho(self) -> float:
        if self.var == 0:
            return 1.0
        if self.m == self.x0:
            return math.inf
        return 1.0 + self.var / (self.m - self.x0) ** 2

    @classmethod
    def from_rho(cls, m_tilde: float, rho: float, x0: float = 1.0) -> "MomentParams":
        if rho < 1:
            raise DomainError("rho must be >= 1")
        var = (rho - 1.0) * (m_tilde * x0) ** 2
        return cls((m_tilde + 1.0) * x0, var, x0)


def simple_cross_moment(params: MomentParams, k: int, l: int) -> float:
    """Covariance of the simple products ``U_k`` and ``U_l`` (``k <= l``)."""
    if not 0 <= k <= l:
        raise DomainError("need 0 <= k <= l")
    mt, b2 = params.m_tilde, params.beta2
    return b2**k * mt ** (l - k) - mt ** (k + l)


def _shared_term(mt: float, b2: float, k: int, l: int, j: int) -> float:
    # E[...] when j of the k+l factors are shared: m_tilde^{l+k} rho^j
    return mt ** (l + k - 2 * j) * b2**j


def cycling_cross_moment(params: MomentParams, r: int, k: int, l: int) -> float:
    """``E[U^C_{r,k} U^C_{r,l}]`` for ``1 <= k <= l <= r``.

    With ``T_j = m_tilde^{l+k} rho^j``:

    * ``r == l``: ``T_k`` (the length-``r`` window is the full product);
    * ``r >= l + k``: ``[(r-l-k+1) T_0 + 2 sum_{j=1}^{k-1} T_j + (l-k+1) T_k] / r``;
    * otherwise: ``[2 sum_{j=l+k-r+1}^{k-1} T_j + (l-k+1) T_k + (l+k-r+1) T_{l+k-r}] / r``.

    ``U_{r,0} = 1`` is not covered; callers handle ``k = 0`` directly.
    """
    if k < 1:
        raise DomainError("cycling moments are defined for k >= 1 (U_{r,0} = 1)")
    if not k <= l <= r:
        raise DomainError("need 1 <= k <= l <= r")
    mt, b2 = params.m_tilde, params.beta2

    def T(j):
        return _shared_term(mt, b2, k, l, j)

    if r == l:
        return T(k)
    if r >= l + k:
        total = (r - l - k + 1) * T(0) + 2 * sum(T(j) for j in range(1, k)) + (l - k + 1) * T(k)
    else:
        q = l + k - r
        total = 2 * sum(T(j) for j in range(q + 1, k)) + (l - k + 1) * T(k) + (q + 1) * T(q)
    return total / r


def cycling_cov_bound(params: MomentParams, r: int, k: int, l: int) -> float:
    """Upper bound on ``cov(U^C_{r,k}, U^C_{r,l})``.

    ``beta0^{l+k}`` times ``rho^k (l+k)/r`` if ``r >= l+k``, ``rho^k - 1`` if
    ``r == l`` and ``rho^k + 1`` otherwise.
    """
    if not 1 <= k <= l <= r:
        raise DomainError("need 1 <= k <= l <= r")
    b0, b2 = params.beta0, params.beta2
    lead = b0 ** (l - k) * b2**k  # beta0^{l+k} rho^k
    if r == l:
        return lead - b0 ** (l + k)
    if r >= l + k:
        return lead * (l + k) / r
    return lead + b0 ** (l + k)


def simple_variance_limit(params: MomentParams) -> float:
    """``lim_{p->0} E[var(f_hat^S | R)]`` for ``f(x) = 1/x``.

    Equals ``(2 x0/m - 1) / x0^2 * [1/(1-beta^2) - 1/(1-beta0^2)]`` for the
    coefficients ``gamma_k = (-1)^k / x0``.
    """
    b2, b02 = params.beta2, params.beta0**2
    if b2 >= 1:
        raise DomainError(f"beta^2 = {b2} >= 1: the limit is infinite")
    x0, m = params.x0, params.m
    return (2.0 * x0 / m - 1.0) / x0**2 * (1.0 / (1.0 - b2) - 1.0 / (1.0 - b02))


def _check_p(p: float, upper: float, what: str):
    if not 0.0 < p < upper:
        raise DomainError(f"p = {p} outside the admissible interval (0, {upper}) for {what}")


def prop1_bounds(p: float, beta0: float, c: float, f_m: float, gamma0: float) -> tuple[float, float]:
    """Lower and upper bounds on ``var[E[f_hat | R]]`` (truncation variance)."""
    _check_p(p, 1.0 - beta0**2, "the truncation-variance bounds")
    lower = (f_m - gamma0) ** 2 * p / (1.0 - p)
    upper = c**2 * beta0**2 / (1.0 - beta0) ** 2 * p / (1.0 - p - beta0**2)
    return lower, upper


def prop2_bound(p: float, beta: float, c: float) -> float:
    """Bound on ``E[var(f_hat^S | R)]``; does not vanish as ``p -> 0``."""
    _check_p(p, 1.0 - beta**2, "the simple-estimator bound")
    return c**2 * (1.0 + beta) / (1.0 - beta) * (1.0 - p) / (1.0 - p - beta**2)


def prop3_bound(p: float, beta0: float, beta: float, c: float) -> float:
    """Bound on ``E[var(f_hat^C | R)]``, of order ``p log(1/p)``."""
    _check_p(p, 1.0 - beta**2, "the cycling-estimator bound")
    return (4.0 * c**2 * p * math.log(1.0 / p) / (1.0 - p - beta**2) ** 2
            * (beta**2 + 2.0 * beta0 * (1.0 - p) / (1.0 - beta0) ** 2))


def conditional_expectation_given_r(expansion: Expansion, law: TruncationLaw, m: float, r: int) -> float:
    """``E[f_hat | R = r] = sum_{k<=r} gamma_k (m/x0 - 1)^k / P(R >= k)``."""
    if r < 0:
        raise DomainError("r must be non-negative")
    return float(conditional_expectation_curve(expansion, law, m, r)[r])


def conditional_expectation_curve(expansion: Expansion, law: TruncationLaw, m: float, r_max: int) -> np.ndarray:
    """``E[f_hat | R = r]`` for every ``r = 0..r_max``."""
    k = np.arange(r_max + 1, dtype=float)
    ratio = (m / expansion.x0 - 1.0) / (1.0 - law.p)
    terms = expansion.coefficients(r_max) * ratio**k
    return np.cumsum(terms)


def truncation_moments(expansion: Expansion, law: TruncationLaw, m: float, tail: float = 1e-17):
    """Exact ``(E[E[f_hat|R]], var[E[f_hat|R]])`` by summing over the law of R.

    The sum stops once the remaining geometric mass drops below ``tail``;
    only meaningful when ``beta0^2 < 1 - p``.
    """
    n = int(math.ceil(math.log(tail) / math.log1p(-law.p)))
    cond = conditional_expectation_curve(expansion, law, m, n)
    mass = law.p * (1.0 - law.p) ** np.arange(n + 1, dtype=float)
    mean = float(mass @ cond)
    return mean, float(mass @ (cond - mean) ** 2)


def reciprocal_tail_expectation(p: float, k: int, tail: float = 1e-14) -> tuple[float, float]:
    """``E[1/R | R >= k]`` for Geometric(p), and its bound ``p log(1/p)/(1-p)``."""
    if k < 1:
        raise DomainError("k must be at least 1")
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    # E[1/R | R>=k] = p * sum_{h>=1} (1-p)^{h-1} / (h+k-1); tail of the series is
    # below (1-p)^N / (p (N+k-1)) relative to the leading term 1/k.
    n = int(math.ceil(math.log(tail * p) / math.log1p(-p))) + 1
    h = np.arange(1, n + 1, dtype=float)
    terms = (1.0 - p) ** (h - 1) / (h + k - 1)
    exact = p * math.fsum(terms)
    bound = p * math.log(1.0 / p) / (1.0 - p)
    return exact, bound


@dataclass(frozen=True)
class GradientMoments:
    """Second-order moments of the pair ``(X, G)`` beyond ``(m, var)``.

    ``s2 = E[G^2]``, ``t = E[(X/x0 - 1) G]``, ``grad_m = E[G]`` (scalar case).
    """

    s2: float
    t: float
    grad_m: float


def _check_gradient_moments(params: MomentParams, g: GradientMoments):
    if g.s2 < g.grad_m**2 * (1 - 1e-12):
        raise DomainError("need E[G^2] >= E[G]^2")
    if abs(g.t) > math.sqrt(g.s2 * params.beta2) * (1 + 1e-12):
        raise DomainError("need |E[YG]| <= sqrt(E[G^2] E[Y^2])")


def _window_overlap_moment(r, k, l, u, mt, b2, g: GradientMoments):
    # E[V(1:k) V(u:u+l-1)] on a ring of r indices; V has Y factors then a G at the end
    a_y = set(range(k - 1))
    a_g = k - 1
    b_idx = [(u + i) % r for i in range(l)]
    b_y = set(b_idx[:-1])
    b_g = b_idx[-1]
    val = 1.0
    for i in set(range(k)) | set(b_idx):
        in_a = "Y" if i in a_y else ("G" if i == a_g else None)
        in_b = "Y" if i in b_y else ("G" if i == b_g else None)
        if in_a and in_b:
            pair = {in_a, in_b}
            val *= b2 if pair == {"Y"} else (g.s2 if pair == {"G"} else g.t)
        else:
            val *= mt if (in_a or in_b) == "Y" else g.grad_m
    return val


def gradient_cycling_cross_moment(params: MomentParams, grad: GradientMoments, r: int, k: int, l: int) -> float:
    """``E[W^C_{r,k} W^C_{r,l}]`` for scalar gradients, ``1 <= k <= l <= r``.

    For ``r >= k + l`` this is the six-term sum over window offsets: the
    coincident window, windows overlapping the reference on the left (``rho``
    powers times ``t grad_m``), disjoint windows (``m_tilde^{k+l-2}
    grad_m^2``), wrapped windows, and the wrapped window whose ``G`` lands on
    the reference ``G`` (``s2``). Shorter rings make wrapped windows overlap
    the reference twice and the moment is summed offset by offset instead.
    """
    if not 1 <= k <= l <= r:
        raise DomainError("need 1 <= k <= l <= r")
    _check_gradient_moments(params, grad)
    mt, b2 = params.m_tilde, params.beta2
    tg = grad.t * grad.grad_m
    if r < k + l:
        return sum(_window_overlap_moment(r, k, l, u, mt, b2, grad) for u in range(r)) / r

    total = 0.0
    # offset 0: both windows start together
    total += b2 ** (k - 1) * (mt ** (l - k - 1) * tg if l > k else grad.s2)
    # 1 <= offset < k: reference G sits on a Y of the other window
    for i in range(2, min(k, r - l + 1) + 1):
        total += b2 ** (k - i) * mt ** (l - k + 2 * i - 3) * tg
    # disjoint windows
    total += max(0, r - l + 1 - k) * mt ** (k + l - 2) * grad.grad_m**2
    # wrapped windows ending inside the reference Y block
    for i in range(1, k):
        total += b2 ** (i - 1) * mt ** (k + l - 2 * i - 1) * tg
    if l > k:
        total += b2 ** (k - 1) * grad.s2 * mt ** (l - k)
        total += max(0, l - k - 1) * b2 ** (k - 1) * mt ** (l - k - 1) * tg
    return total / r


def gradient_cycling_cov_bound(params: MomentParams, grad: GradientMoments, r: int, k: int, l: int) -> float:
    """``2/r rho^{k-1} beta0^{k+l-3} max(beta0, 1) s2 (2l - 2)``.

    Transcribed as published; it vanishes at ``k = l = 1`` where the true
    covariance ``(s2 - grad_m^2)/r`` does not, so treat it as indicative only.
    """
    if not 1 <= k <= l <= r:
        raise DomainError("need 1 <= k <= l <= r")
    b0, b2 = params.beta0, params.beta2
    if b0 == 0.0:
        lead = 0.0 if l - k - 1 >= 0 else math.inf
        lead *= b2 ** (k - 1) if lead == 0.0 else 1.0
    else:
        lead = b2 ** (k - 1) * b0 ** (l - k - 1)  # rho^{k-1} beta0^{k+l-3}
    return 2.0 / r * lead * max(b0, 1.0) * grad.s2 * (2 * l - 2)
