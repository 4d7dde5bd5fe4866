"""Closed-form max-information bounds, conversions and p-value corrections.

All ``k`` values are in bits. Bounds whose raw ``beta`` exceeds 1 are
reported with ``beta = 1`` and ``vacuous = True``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .errors import HypothesisViolated, InvalidBeta, ParamOutOfRange

LOG2E = math.log2(math.e)
# Bound on (1 - w) log2(1 / (1 - w)) over w in [0, 1].
MI_SLACK_BITS = 0.54


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ParamOutOfRange("epsilon must be nonnegative")
        if not 0 <= self.delta <= 1:
            raise ParamOutOfRange("delta must lie in [0, 1]")


@dataclass(frozen=True)
class BoundBreakdown:
    """Intermediate constants of the (epsilon, delta) product-distribution bound."""

    delta_hat: float
    delta_prime: float
    delta_dprime: float
    nu: float
    azuma_t: float
    k_bits: float
    beta: float
    beta_azuma_term: float
    beta_exp_form: float
    beta_raw: float


@dataclass(frozen=True)
class MaxInfoBound:
    k_bits: float
    beta: float
    provenance: str
    vacuous: bool = False
    breakdown: BoundBreakdown | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {
            "k_bits": self.k_bits,
            "beta": self.beta,
            "vacuous": self.vacuous,
            "provenance": self.provenance,
        }
        if self.breakdown is not None:
            out["breakdown"] = asdict(self.breakdown)
        return out


def _clamped(k_bits: float, beta: float, provenance: str, breakdown=None) -> MaxInfoBound:
    vacuous = beta > 1
    return MaxInfoBound(
        k_bits=max(0.0, k_bits),
        beta=min(1.0, max(0.0, beta)),
        provenance=provenance,
        vacuous=vacuous,
        breakdown=breakdown,
    )


def pure_dp_bound(epsilon: float, n: int) -> MaxInfoBound:
    """Max-information of an (epsilon, 0)-DP algorithm on any input law."""
    if epsilon < 0 or n < 1:
        raise ParamOutOfRange("need epsilon >= 0 and n >= 1")
    return MaxInfoBound(LOG2E * epsilon * n, 0.0, "pure_dp")


def pure_dp_product_bound(epsilon: float, n: int, beta: float) -> MaxInfoBound:
    """Beta-approximate max-information of an (epsilon, 0)-DP algorithm over product priors."""
    if not 0 < beta < 1:
        raise InvalidBeta("beta must lie in (0, 1)")
    if epsilon < 0 or n < 1:
        raise ParamOutOfRange("need epsilon >= 0 and n >= 1")
    nats = epsilon**2 * n / 2 + epsilon * math.sqrt(n * math.log(2 / beta) / 2)
    return MaxInfoBound(LOG2E * nats, beta, "pure_dp_product")


def nu_bits(epsilon: float, delta_hat: float) -> float:
    """Per-record drift term of the Azuma argument (bits)."""
    e3 = math.exp(3 * epsilon)
    linear = 24 * math.exp(6 * epsilon) / (1 - math.exp(-3 * epsilon)) + LOG2E * (2 * e3 + 1)
    numer = 4 * e3**4 + 4 * e3**3 - 3 * e3**2 - 2 * e3 + 1
    denom = e3**2 - 2 * e3 + 1
    quadratic = 2 * LOG2E * numer / denom
    return 72 * epsilon**2 + delta_hat * linear + delta_hat**2 * quadratic


def approx_dp_product_bound(params: PrivacyParams, n: int) -> MaxInfoBound:
    """Beta-approximate max-information of an (epsilon, delta)-DP algorithm over product priors.

    Uses the explicit proof constants: ``delta_hat = sqrt(eps*delta)/15``,
    Azuma parameter ``t = eps*sqrt(2n)``, ``k = n*nu + 6*t*eps*sqrt(n)`` and
    ``beta = exp(-t^2/2) + n*(delta' + delta'')``.

    Raises:
        ParamOutOfRange: unless ``0 < eps <= 1/2``, ``0 < delta < eps`` and ``n >= 1``.
    """
    eps, delta = params.epsilon, params.delta
    if not 0 < eps <= 0.5:
        raise ParamOutOfRange("epsilon must lie in (0, 1/2]")
    if not 0 < delta < eps:
        raise ParamOutOfRange("delta must lie in (0, epsilon)")
    if n < 1:
        raise ParamOutOfRange("n must be at least 1")
    delta_hat = math.sqrt(eps * delta) / 15
    delta_prime = 2 * delta / delta_hat + 2 * delta / (1 - math.exp(-eps))
    delta_dprime = 2 * delta_hat / (1 - math.exp(-3 * eps))
    nu = nu_bits(eps, delta_hat)
    t = eps * math.sqrt(2 * n)
    k = n * nu + 6 * t * eps * math.sqrt(n)
    azuma = math.exp(-(t**2) / 2)
    beta_raw = azuma + n * (delta_prime + delta_dprime)
    breakdown = BoundBreakdown(
        delta_hat=delta_hat,
        delta_prime=delta_prime,
        delta_dprime=delta_dprime,
        nu=nu,
        azuma_t=t,
        k_bits=k,
        beta=min(1.0, beta_raw),
        beta_azuma_term=azuma,
        beta_exp_form=math.exp(-(eps**2) * n),
        beta_raw=beta_raw,
    )
    return _clamped(k, beta_raw, "approx_dp_product", breakdown)


def description_length_bound(r_bits: float, beta: float) -> MaxInfoBound:
    """Algorithms with ``r_bits``-bit outputs: ``k = r + log2(1/beta)``."""
    if not 0 < beta <= 1:
        raise InvalidBeta("beta must lie in (0, 1]")
    if r_bits < 0:
        raise ParamOutOfRange("r_bits must be nonnegative")
    return MaxInfoBound(r_bits + math.log2(1 / beta), beta, "description_length")


def compose(bounds: Sequence[MaxInfoBound]) -> MaxInfoBound:
    """Adaptive composition: ``k`` and ``beta`` add."""
    if not bounds:
        raise ParamOutOfRange("compose needs at least one bound")
    if len(bounds) == 1:
        return bounds[0]
    k = sum(b.k_bits for b in bounds)
    beta = sum(b.beta for b in bounds)
    vacuous = beta > 1 or any(b.vacuous for b in bounds)
    return MaxInfoBound(k, min(1.0, beta), "composition", vacuous)


def mi_to_maxinfo(m_bits: float, k_bits: float) -> MaxInfoBound:
    """Mutual information ``m`` implies ``I_inf^beta <= k`` for ``beta = (m + 0.54)/k``."""
    if k_bits <= 0 or m_bits < 0:
        raise ParamOutOfRange("need k_bits > 0 and m_bits >= 0")
    return _clamped(k_bits, (m_bits + MI_SLACK_BITS) / k_bits, "mi_to_maxinfo")


def maxinfo_to_mi(k_bits: float, beta: float, sigma_size: int) -> float:
    """Mutual-information bound implied by ``I_inf^beta <= k`` on a size-``sigma_size`` alphabet.

    Evaluates ``2k ln 2 + 2 beta log2(|Sigma| / 2 beta) / (1 - 2^-k)`` as
    printed. The first term is in nats and the second in bits; the sum is
    returned as-is, without reconciling units.
    """
    if k_bits <= 0:
        raise HypothesisViolated("k_bits must be positive")
    limit = 3 * (1 - 2.0 ** (-k_bits)) / 20
    if not 0 <= beta <= limit:
        raise HypothesisViolated(f"beta must lie in [0, {limit:.6g}]")
    if sigma_size < 1:
        raise ParamOutOfRange("sigma_size must be positive")
    first = 2 * k_bits * math.log(2)
    if beta == 0:
        return first
    return first + 2 * beta * math.log2(sigma_size / (2 * beta)) / (1 - 2.0 ** (-k_bits))


def dp_to_mi_bound(params: PrivacyParams, n: int, x_size: int) -> float:
    """Order-of-magnitude mutual information of an (eps, delta)-DP algorithm on product data.

    Evaluates ``n eps^2 + n sqrt(delta/eps) (1 + ln(sqrt(eps/delta)/n) + n log2|X|)``
    with every suppressed constant set to 1. Reference value only, not a
    rigorous bound. Hypotheses are checked with constant 1:
    ``eps in (0, 1/2]``, ``eps >= 1/sqrt(n)``, ``delta <= eps/n^2``.
    """
    eps, delta = params.epsilon, params.delta
    if not 0 < eps <= 0.5:
        raise ParamOutOfRange("epsilon must lie in (0, 1/2]")
    if n < 1 or x_size < 1:
        raise ParamOutOfRange("need n >= 1 and x_size >= 1")
    if eps < 1 / math.sqrt(n):
        raise ParamOutOfRange("epsilon must be at least 1/sqrt(n)")
    if delta > eps / n**2:
        raise ParamOutOfRange("delta must be at most epsilon/n^2")
    base = n * eps**2
    if delta == 0:
        return base
    scale = n * math.sqrt(delta / eps)
    return base + scale * (1 + math.log(math.sqrt(eps / delta) / n) + n * math.log2(x_size))


def pvalue_correction(k_bits: float, beta: float, alpha: float) -> float:
    """Valid corrected significance threshold ``max((alpha - beta)/2^k, 0)``."""
    if not 0 <= alpha <= 1:
        raise ParamOutOfRange("alpha must lie in [0, 1]")
    return max((alpha - beta) / 2.0**k_bits, 0.0)


def mi_pvalue_correction(m_bits: float, alpha: float) -> float:
    """Correction from a mutual-information bound, routed through max-information."""
    if not 0 < alpha <= 1:
        raise ParamOutOfRange("alpha must lie in (0, 1]")
    return alpha / 2 * 2.0 ** (-2 / alpha * (m_bits + MI_SLACK_BITS))


def rz_pvalue_correction(m_bits: float, alpha: float) -> float:
    """Best correction obtainable from the Russo-Zou mutual-information argument."""
    if not 0 < alpha <= 1:
        raise ParamOutOfRange("alpha must lie in (0, 1]")
    return min(alpha / 2, 0.5 * 2.0 ** (-LOG2E * m_bits / alpha**2))


def generalization_tail(k_bits: float, beta: float, n: int, sensitivity: float, tau: float) -> float:
    """Tail ``P[f(X) - E f >= tau]`` for a ``sensitivity``-Lipschitz query chosen with bounded max-information."""
    if sensitivity <= 0 or tau < 0 or n < 1:
        raise ParamOutOfRange("need sensitivity > 0, tau >= 0, n >= 1")
    # log-domain so 2^k * exp(-x) does not overflow for large k.
    log_term = k_bits * math.log(2) - 2 * tau**2 / (n * sensitivity**2)
    term = math.exp(log_term) if log_term < 700 else math.inf
    return min(1.0, term + beta)


def pvalue_sensitivity_floor(n: int) -> float:
    """Smallest possible sensitivity of an exact p-value map on ``n`` records."""
    if n < 1:
        raise ParamOutOfRange("n must be at least 1")
    return 0.37 / math.sqrt(n)

