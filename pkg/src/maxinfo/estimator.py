"""Exact max-information of finite joint distributions.

For a fixed threshold ``k`` the event maximizing ``P[O] - 2^k Q[O]`` (``P`` the
joint, ``Q`` the product of its marginals) is the set of pairs whose ratio
``P/Q`` exceeds ``2^k``. Consequently the supremum defining the approximate
max-information is attained on a prefix of the support sorted by decreasing
ratio, which :func:`approx_max_info` evaluates exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapExceeded, UnboundedRatio
from .prob import JointPMF, label_text

# Lowest reported raw value; below this f(k) is flat at binary64 precision.
RAW_FLOOR_BITS = -40.0
ORACLE_CAP = 20
HOLDS_TOL = 1e-12


@dataclass(frozen=True)
class MaxInfoResult:
    k_bits: float
    raw_k_bits: float
    beta: float
    witness: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "k_bits": self.k_bits,
            "raw_k_bits": self.raw_k_bits,
            "beta": self.beta,
            "witness": [[label_text(x), label_text(z)] for x, z in self.witness],
        }


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of testing a claimed ``(k, beta)`` bound against a joint."""

    margin: float
    holds: bool
    residual: float
    witness: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "margin": self.margin,
            "holds": self.holds,
            "residual": self.residual,
            "witness_size": len(self.witness),
        }


def _log2(value) -> float:
    if isinstance(value, Fraction):
        return math.log2(value.numerator) - math.log2(value.denominator)
    return math.log2(value)


def _support_arrays(joint: JointPMF):
    """Joint and product masses on the support, row-major order."""
    p = joint.mass
    q = joint.product_mass
    rows, cols = np.nonzero(p != 0)
    ps, qs = p[rows, cols], q[rows, cols]
    if np.any(qs == 0):
        raise UnboundedRatio("a support pair has zero product-of-marginals mass")
    return rows, cols, ps, qs


def _pairs(joint: JointPMF, rows, cols) -> tuple:
    return tuple((joint.left.labels[i], joint.right.labels[j]) for i, j in zip(rows, cols))


def exact_max_info(joint: JointPMF) -> MaxInfoResult:
    """Max-information ``log2 max P(x,z) / (P(x) P(z))`` over the joint support."""
    rows, cols, ps, qs = _support_arrays(joint)
    ratios = ps / qs
    best = int(np.argmax(ratios)) if not joint.exact else max(range(len(ratios)), key=ratios.__getitem__)
    raw = _log2(ratios[best])
    return MaxInfoResult(
        k_bits=max(0.0, raw),
        raw_k_bits=raw,
        beta=0.0,
        witness=_pairs(joint, rows[best : best + 1], cols[best : best + 1]),
    )


def _threshold(joint: JointPMF, k_bits):
    if joint.exact and float(k_bits).is_integer():
        return Fraction(2) ** int(k_bits)
    return 2.0 ** float(k_bits)


def beta_at_k(joint: JointPMF, k_bits: float):
    """Smallest ``beta`` for which ``k_bits`` bounds the beta-approximate max-information.

    Equals ``sum(max(P - 2^k Q, 0))`` over all pairs.
    """
    residual = joint.mass - _threshold(joint, k_bits) * joint.product_mass
    if joint.exact:
        return sum((r for r in residual.ravel() if r > 0), Fraction(0))
    return float(np.sum(np.maximum(residual, 0.0)))


def approx_max_info(joint: JointPMF, beta: float) -> MaxInfoResult:
    """Beta-approximate max-information of ``joint`` in bits.

    ``raw_k_bits`` is ``inf{k : beta_at_k(joint, k) <= beta}`` floored at
    ``RAW_FLOOR_BITS``; ``k_bits`` clamps it at zero.

    Args:
        joint: the joint law of (dataset, outcome).
        beta: additive slack, ``0 <= beta < 1``.
    """
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    rows, cols, ps, qs = _support_arrays(joint)
    ratios = ps / qs
    if joint.exact:
        order = sorted(range(len(ratios)), key=lambda i: -ratios[i])
        order = np.array(order, dtype=np.int64)
    else:
        order = np.argsort(-ratios, kind="stable")
    cum_p = np.cumsum(ps[order])
    cum_q = np.cumsum(qs[order])
    if joint.exact:
        beta_cmp = Fraction(beta)
    else:
        beta_cmp = float(beta)
    admissible = np.nonzero(cum_p > beta_cmp)[0]
    if len(admissible) == 0:
        return MaxInfoResult(0.0, RAW_FLOOR_BITS, float(beta), ())
    values = (cum_p[admissible] - beta_cmp) / cum_q[admissible]
    if joint.exact:
        pos = max(range(len(values)), key=values.__getitem__)
    else:
        pos = int(np.argmax(values))
    raw = max(RAW_FLOOR_BITS, _log2(values[pos]))
    prefix = order[: admissible[pos] + 1]
    return MaxInfoResult(
        k_bits=max(0.0, raw),
        raw_k_bits=raw,
        beta=float(beta),
        witness=_pairs(joint, rows[prefix], cols[prefix]),
    )


def oracle_subset_enum(joint: JointPMF, beta: float, clamp: bool = True, cap: int = ORACLE_CAP) -> float:
    """Reference value of the beta-approximate max-information by brute force.

    Maximizes ``log2((P[O] - beta) / Q[O])`` over every subset ``O`` of the
    support with ``P[O] > beta``. Exponential; intended for validation only.
    """
    joint = joint.to_float()
    p, q = joint.mass, joint.product_mass
    rows, cols = np.nonzero(p != 0)
    ps, qs = p[rows, cols], q[rows, cols]
    s = len(ps)
    if s > cap:
        raise CapExceeded(f"support of {s} pairs exceeds oracle cap {cap}")
    best = -math.inf
    chunk = 1 << min(s, 16)
    bits = 1 << np.arange(s, dtype=np.int64)
    for start in range(1, 1 << s, chunk):
        masks = np.arange(start, min(start + chunk, 1 << s), dtype=np.int64)
        member = (masks[:, None] & bits[None, :]) != 0
        p_o = member @ ps
        q_o = member @ qs
        ok = p_o > beta
        if np.any(ok):
            best = max(best, float(np.max((p_o[ok] - beta) / q_o[ok])))
    if best == -math.inf or best <= 0:
        return 0.0 if clamp else -math.inf
    raw = math.log2(best)
    return max(0.0, raw) if clamp else raw


def check_bound(joint: JointPMF, bound_k: float, bound_beta: float) -> BoundCheck:
    """Test ``I_inf^beta(X; Z) <= k`` on an exact joint.

    ``margin = beta_at_k(joint, k) - beta``; the bound holds iff the margin is
    nonpositive (up to ``HOLDS_TOL`` of float rounding). The witness is the
    threshold set of pairs whose ratio exceeds ``2^k``.
    """
    residual_f = float(beta_at_k(joint, bound_k))
    margin = residual_f - float(bound_beta)
    p = joint.to_float().mass
    q = joint.to_float().product_mass
    rows, cols = np.nonzero(p - 2.0 ** float(bound_k) * q > 0)
    return BoundCheck(
        margin=margin,
        holds=margin <= HOLDS_TOL,
        residual=residual_f,
        witness=_pairs(joint, rows, cols),
    )


def mutual_information(joint: JointPMF) -> float:
    """Shannon mutual information of the joint, in bits."""
    joint = joint.to_float()
    p, q = joint.mass, joint.product_mass
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))
