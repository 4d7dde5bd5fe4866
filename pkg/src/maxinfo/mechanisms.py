"""Exact-kernel DP mechanisms, a Laplace sampler and an exhaustive DP verifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, ParamOutOfRange, ValidationError
from .prob import (
    DatasetDomain,
    Domain,
    MechanismKernel,
    enumerate_datasets,
    enumeration_cap,
    label_text,
)

BITS = Domain((0, 1))
PASS_TOL = 1e-12


@dataclass(frozen=True)
class DpVerdict:
    passes: bool
    worst_pair: tuple
    worst_residual: float
    epsilon: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "passes": self.passes,
            "worst_pair": [label_text(x) for x in self.worst_pair],
            "worst_residual": self.worst_residual,
            "epsilon": self.epsilon,
            "delta": self.delta,
        }


def _popcount_table(size: int) -> np.ndarray:
    idx = np.arange(size, dtype=np.uint64)
    return np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.int64)


def truthful_probability(epsilon: float) -> float:
    # 1 / (1 + e^-eps) stays finite for large epsilon.
    return 1.0 / (1.0 + math.exp(-epsilon))


def rr_kernel(epsilon: float, n: int, cap: int | None = None) -> MechanismKernel:
    """Randomized response on each of ``n`` bits; (epsilon, 0)-DP."""
    if epsilon < 0:
        raise ParamOutOfRange("epsilon must be nonnegative")
    domain = enumerate_datasets(BITS, n, cap)
    cap = enumeration_cap() if cap is None else cap
    if domain.size**2 > cap:
        raise CapExceeded(f"kernel with {domain.size}^2 entries exceeds cap {cap}")
    p = truthful_probability(epsilon)
    flips = _popcount_table(domain.size)
    rows = p ** (n - flips) * (1.0 - p) ** flips
    return MechanismKernel(domain, domain, rows)


def geometric_count_kernel(epsilon: float, n: int, truncation: int) -> MechanismKernel:
    """Hamming weight plus two-sided geometric noise, clamped to ``[0, truncation]``.

    ``P[G = g]`` is proportional to ``exp(-epsilon |g|)``; clamping folds each
    tail onto its boundary, which is post-processing and keeps the mechanism
    (epsilon, 0)-DP.
    """
    if epsilon <= 0:
        raise ParamOutOfRange("epsilon must be positive")
    if truncation < n:
        raise ParamOutOfRange("truncation must be at least n")
    domain = enumerate_datasets(BITS, n)
    alpha = math.exp(-epsilon)
    weights = domain.digits.sum(axis=1)
    ys = np.arange(truncation + 1)
    gap = np.abs(ys[None, :] - weights[:, None])
    rows = (1 - alpha) / (1 + alpha) * alpha**gap
    rows[:, 0] = alpha ** weights / (1 + alpha)
    rows[:, truncation] = alpha ** (truncation - weights) / (1 + alpha)
    return MechanismKernel(domain, Domain(tuple(range(truncation + 1))), rows)


def laplace_transform(u, scale: float):
    """Inverse CDF of Laplace(0, scale) applied to uniform ``u``."""
    u = np.asarray(u, dtype=np.float64)
    centered = u - 0.5
    out = -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))
    return out if out.ndim else float(out)


def laplace_sample(scale: float, rng: np.random.Generator, size=None):
    """Draw Laplace(0, scale) noise by inverse-CDF transform of ``rng.random()``."""
    if scale <= 0:
        raise ParamOutOfRange("scale must be positive")
    return laplace_transform(rng.random(size), scale)


def laplace_cdf(scale: float, x: float) -> float:
    if scale <= 0:
        raise ParamOutOfRange("scale must be positive")
    if x >= 0:
        return 1.0 - 0.5 * math.exp(-x / scale)
    return 0.5 * math.exp(x / scale)


def neighbor_pairs(domain: DatasetDomain) -> tuple[np.ndarray, np.ndarray]:
    """All ordered pairs of datasets differing in exactly one record, lexicographically sorted."""
    base = np.arange(domain.size, dtype=np.int64)
    left, right = [], []
    for pos in range(domain.n):
        for value in range(domain.radix):
            other = domain.neighbor_index(base, pos, value)
            keep = other != base
            left.append(base[keep])
            right.append(other[keep])
    left = np.concatenate(left)
    right = np.concatenate(right)
    order = np.lexsort((right, left))
    return left[order], right[order]


def hockey_stick(p: np.ndarray, q: np.ndarray, epsilon: float) -> np.ndarray:
    """Row-wise ``sum(max(p - e^eps q, 0))``."""
    return np.maximum(p - math.exp(epsilon) * q, 0.0).sum(axis=-1)


def verify_dp(kernel: MechanismKernel, epsilon: float, delta: float, cap: int | None = None) -> DpVerdict:
    """Exhaustively check (epsilon, delta)-DP under record substitution.

    For each ordered neighbor pair the worst event is the set of outputs where
    ``p_x > e^eps p_x'``, so the residual is the hockey-stick divergence. The
    worst pair is the first maximizer in lexicographic pair order.
    """
    domain = kernel.input_domain
    if not isinstance(domain, DatasetDomain):
        raise ValidationError("kernel input domain must be an enumerated dataset space")
    cap = enumeration_cap() if cap is None else cap
    n_pairs = domain.size * domain.n * (domain.radix - 1)
    if n_pairs * kernel.output_domain.size > cap:
        raise CapExceeded(f"{n_pairs} neighbor pairs exceed verification cap {cap}")
    rows = np.asarray(kernel.rows, dtype=np.float64)
    if n_pairs == 0:
        return DpVerdict(True, (), 0.0, epsilon, delta)
    left, right = neighbor_pairs(domain)
    residual = np.empty(len(left))
    step = max(1, cap // max(1, 4 * kernel.output_domain.size))
    for start in range(0, len(left), step):
        sl = slice(start, start + step)
        residual[sl] = hockey_stick(rows[left[sl]], rows[right[sl]], epsilon)
    worst = int(np.argmax(residual))
    worst_residual = float(residual[worst])
    pair = (domain.labels[left[worst]], domain.labels[right[worst]])
    return DpVerdict(
        passes=worst_residual <= delta + PASS_TOL,
        worst_pair=pair,
        worst_residual=worst_residual,
        epsilon=epsilon,
        delta=delta,
    )
