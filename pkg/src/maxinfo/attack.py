"""Reconstruction from a syndrome followed by a private decoder.

The first stage publishes the syndrome ``a = Hx`` of the dataset (``r`` bits,
hence low max-information). The second stage is differentially private for
every fixed ``a``: it decodes ``x`` to the nearest member of the coset
``C_a`` and releases it only when the noisy distance falls below a threshold
``w``. On ``a = Hx`` the distance is zero, so the composition usually returns
``x`` itself even though each stage leaks little on its own.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .codes import (
    AffineCoset,
    BitString,
    ParityCheckCode,
    coset_distance_table,
    nearest_codeword,
    syndrome,
)
from .errors import InfeasibleVerification, ParamOutOfRange
from .estimator import approx_max_info
from .harness import content_digest, run_trials, trial_rng
from .mechanisms import BITS, laplace_cdf, laplace_sample
from .prob import PMF, Domain, JointPMF, MechanismKernel, enumerate_datasets, enumeration_cap, joint_from_kernel

BOT = "⊥"
SUCCESS, BOTTOM, WRONG = 0, 1, 2
# Exact reference for the bottom rate is computed up to this many strings.
EXACT_BOT_CAP = 2**20
DEFAULT_BLOWUP_BETA = 0.1


@dataclass(frozen=True)
class AttackParams:
    epsilon: float
    delta: float
    n: int
    d_min: int
    r: int
    w: float
    mode: str = "demo"
    verification_feasible: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def threshold(d_min: int, epsilon: float, delta: float) -> float:
    """Release threshold ``(d_min - 1)/4 - log2(1/delta)/epsilon``."""
    return (d_min - 1) / 4 - math.log2(1 / delta) / epsilon


def derive_params(epsilon: float, delta: float, n: int, cap: int | None = None) -> AttackParams:
    """Parameters that make the decoder (epsilon, delta)-DP.

    The distance is the smallest integer at least ``8 log2(1/delta)/epsilon + 1``
    and the row count is ``ceil(3 d_min log2 n)``.

    Raises:
        ParamOutOfRange: outside ``0 < eps <= 1/2``, ``0 < delta <= 1/4``,
            ``n > 64e`` or when ``r >= n``.
    """
    if not 0 < epsilon <= 0.5:
        raise ParamOutOfRange("epsilon must lie in (0, 1/2]")
    if not 0 < delta <= 0.25:
        raise ParamOutOfRange("delta must lie in (0, 1/4]")
    if not n > 64 * math.e:
        raise ParamOutOfRange("n must exceed 64e")
    d_min = math.ceil(8 * math.log2(1 / delta) / epsilon + 1 - 1e-9)
    r = math.ceil(3 * d_min * math.log2(n) - 1e-9)
    if r >= n:
        raise ParamOutOfRange(f"r = {r} parity rows leave no room in length {n}")
    cap = enumeration_cap() if cap is None else cap
    feasible = (n - r) <= 62 and (1 << (n - r)) <= cap
    return AttackParams(epsilon, delta, n, d_min, r, threshold(d_min, epsilon, delta), "theorem", feasible)


def demo_params(code: ParityCheckCode, epsilon: float, delta: float | None = None, w: float | None = None) -> AttackParams:
    """Parameters for a small verified code, outside the asymptotic regime.

    Exactly one of ``delta`` and ``w`` may be omitted; the other is implied by
    the threshold formula.
    """
    if code.d_min is None:
        raise ParamOutOfRange("code distance must be known")
    if epsilon <= 0:
        raise ParamOutOfRange("epsilon must be positive")
    if w is None:
        if delta is None or not 0 < delta <= 1:
            raise ParamOutOfRange("delta must lie in (0, 1] when w is not given")
        w = threshold(code.d_min, epsilon, delta)
    elif delta is None:
        delta = min(1.0, 2.0 ** (-epsilon * ((code.d_min - 1) / 4 - w)))
    if w < 0:
        raise ParamOutOfRange("threshold w must be nonnegative")
    return AttackParams(epsilon, delta, code.n, code.d_min, code.r, float(w), "demo", True)


def mechanism_B(x: BitString, a: BitString, code: ParityCheckCode, epsilon: float, delta: float,
                rng: np.random.Generator, w: float | None = None):
    """Private decoder: the nearest member of ``C_a`` if the noisy distance is below ``w``, else ``None``.

    ``None`` stands for the bottom output. ``w`` defaults to the threshold
    formula evaluated at ``code.d_min``.
    """
    if w is None:
        w = threshold(code.d_min, epsilon, delta)
    decoded, dist = nearest_codeword(AffineCoset(code, a), x)
    noisy = dist + laplace_sample(1 / epsilon, rng)
    return decoded if noisy < w else None


def random_bits(n: int, rng: np.random.Generator) -> BitString:
    nbytes = (n + 7) // 8
    return BitString(n, int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - n))


def _outcome(x: BitString, out) -> int:
    if out is None:
        return BOTTOM
    return SUCCESS if out == x else WRONG


def _composition_chunk(start, stop, seed, code, epsilon, w):
    out = np.empty(stop - start, dtype=np.int8)
    for i, t in enumerate(range(start, stop)):
        rng = trial_rng(seed, "composition", t)
        x = random_bits(code.n, rng)
        result = mechanism_B(x, syndrome(code, x), code, epsilon, 0.0, rng, w)
        out[i] = _outcome(x, result)
    return out


def _fixed_chunk(start, stop, seed, code, a_value, epsilon, w):
    coset = AffineCoset(code, BitString(code.r, a_value))
    members = coset.members()
    out = np.empty(stop - start, dtype=np.int8)
    for i, t in enumerate(range(start, stop)):
        rng = trial_rng(seed, "fixed-syndrome", t)
        x = random_bits(code.n, rng)
        dists = np.bitwise_count(members ^ np.uint64(x.value))
        best = int(np.argmin(dists))
        noisy = int(dists[best]) + laplace_sample(1 / epsilon, rng)
        out[i] = BOTTOM if not noisy < w else _outcome(x, BitString(code.n, int(members[best])))
    return out


@dataclass(frozen=True)
class AttackReport:
    kind: str
    trials: int
    reconstruct_successes: int
    bot_count: int
    wrong_codeword_count: int
    analytic_success: float | None
    analytic_bot: float | None
    seed: int
    params: AttackParams
    code_trust: str = "verified"
    extra: dict = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.reconstruct_successes / self.trials if self.trials else math.nan

    @property
    def bot_rate(self) -> float:
        return self.bot_count / self.trials if self.trials else math.nan

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "reconstruct_successes": self.reconstruct_successes,
            "bot_count": self.bot_count,
            "wrong_codeword_count": self.wrong_codeword_count,
            "analytic_success": self.analytic_success,
            "analytic_bot": self.analytic_bot,
            "seed": self.seed,
            "params": self.params.to_dict(),
            "code_trust": self.code_trust,
            **self.extra,
        }

    def to_dict(self) -> dict:
        out = self.payload()
        if self.trials:
            out["success_rate"] = self.success_rate
            out["bot_rate"] = self.bot_rate
        out["digest"] = content_digest(self.payload())
        return out


def _check_match(params: AttackParams, code: ParityCheckCode) -> None:
    if (params.n, params.r) != (code.n, code.r):
        raise ParamOutOfRange("code does not match the attack parameters")
    if code.d_min is not None and code.d_min < params.d_min:
        raise ParamOutOfRange("code distance is below the required d_min")


def _trust(code: ParityCheckCode) -> str:
    return "verified" if code.verified else "declared"


def _require_feasible(params: AttackParams, code: ParityCheckCode) -> None:
    cap = enumeration_cap()
    if code.k > 62 or (1 << code.k) > cap:
        raise InfeasibleVerification(
            f"decoding enumerates 2^{code.k} coset members, above cap {cap}; only analytic values are available"
        )


def analytic_report(params: AttackParams, code: ParityCheckCode | None = None, seed: int = 0) -> AttackReport:
    """Report carrying only the closed-form success probability."""
    return AttackReport(
        kind="analytic",
        trials=0,
        reconstruct_successes=0,
        bot_count=0,
        wrong_codeword_count=0,
        analytic_success=laplace_cdf(1 / params.epsilon, params.w),
        analytic_bot=None,
        seed=seed,
        params=params,
        code_trust="none" if code is None else _trust(code),
    )


def run_composition_trials(params: AttackParams, code: ParityCheckCode, trials: int, seed: int,
                           workers: int = 1) -> AttackReport:
    """Draw ``x`` uniformly, publish its syndrome and run the private decoder on it."""
    _check_match(params, code)
    _require_feasible(params, code)
    outcomes = run_trials(_composition_chunk, trials, workers, seed, code, params.epsilon, params.w)
    counts = np.bincount(outcomes.astype(np.int64), minlength=3)
    return AttackReport(
        kind="composition",
        trials=trials,
        reconstruct_successes=int(counts[SUCCESS]),
        bot_count=int(counts[BOTTOM]),
        wrong_codeword_count=int(counts[WRONG]),
        analytic_success=laplace_cdf(1 / params.epsilon, params.w),
        analytic_bot=1 - laplace_cdf(1 / params.epsilon, params.w),
        seed=seed,
        params=params,
        code_trust=_trust(code),
    )


def distance_histogram(code: ParityCheckCode, a: BitString) -> np.ndarray:
    """Number of ``x`` in ``{0,1}^n`` at each distance from ``C_a``."""
    table = coset_distance_table(AffineCoset(code, a), cap=EXACT_BOT_CAP)
    return np.bincount(table)


def exact_bot_probability(code: ParityCheckCode, a: BitString, epsilon: float, w: float) -> float:
    """``P[decoder returns bottom]`` for uniform ``x``, by enumerating all ``2^n`` inputs."""
    hist = distance_histogram(code, a)
    probs = np.array([1 - laplace_cdf(1 / epsilon, w - d) for d in range(len(hist))])
    return float(hist @ probs / 2.0**code.n)


def packing_tail(code: ParityCheckCode, a: BitString) -> tuple[float, float]:
    """Exact ``P[d_X < s]`` with ``s = (d_min - 1)/4``, and the bound ``s (4es/n)^s``."""
    s = (code.d_min - 1) / 4
    hist = distance_histogram(code, a)
    exact = float(hist[: math.ceil(s)].sum() / 2.0**code.n) if s > 0 else 0.0
    bound = s * (4 * math.e * s / code.n) ** s if s > 0 else 0.0
    return exact, bound


def run_fixed_syndrome_trials(params: AttackParams, code: ParityCheckCode, a: BitString, trials: int,
                              seed: int, workers: int = 1) -> AttackReport:
    """Run the decoder with a fixed syndrome ``a`` on uniform ``x`` unrelated to ``a``."""
    _check_match(params, code)
    _require_feasible(params, code)
    if a.length != code.r:
        raise ParamOutOfRange(f"syndrome must have {code.r} bits")
    if code.n > 64:
        raise InfeasibleVerification("fixed-syndrome trials support n <= 64")
    outcomes = run_trials(_fixed_chunk, trials, workers, seed, code, a.value, params.epsilon, params.w)
    counts = np.bincount(outcomes.astype(np.int64), minlength=3)
    analytic_bot, extra = None, {"syndrome": str(a)}
    if (1 << code.n) <= EXACT_BOT_CAP:
        analytic_bot = exact_bot_probability(code, a, params.epsilon, params.w)
        exact, bound = packing_tail(code, a)
        extra.update(packing_tail_exact=exact, packing_tail_bound=bound)
    return AttackReport(
        kind="fixed_syndrome",
        trials=trials,
        reconstruct_successes=int(counts[SUCCESS]),
        bot_count=int(counts[BOTTOM]),
        wrong_codeword_count=int(counts[WRONG]),
        analytic_success=None,
        analytic_bot=analytic_bot,
        seed=seed,
        params=params,
        code_trust=_trust(code),
        extra=extra,
    )


def blowup_bits(n: int, success_rate: float, beta: float = DEFAULT_BLOWUP_BETA) -> float:
    """Lower bound ``log2((success - beta) / 2^-n)`` on beta-approximate max-information.

    The event "output equals input" has probability ``success`` under the
    joint and at most ``2^-n`` under the independent copy. Returns 0 when the
    success rate does not exceed ``beta``.
    """
    if success_rate <= beta:
        return 0.0
    return n + math.log2(success_rate - beta)


def maxinfo_blowup_estimate(params: AttackParams, code: ParityCheckCode, trials: int, seed: int,
                            beta: float = DEFAULT_BLOWUP_BETA, workers: int = 1) -> float:
    if code.n > 20:
        raise ParamOutOfRange("blow-up estimate is limited to n <= 20")
    report = run_composition_trials(params, code, trials, seed, workers)
    return blowup_bits(code.n, report.success_rate, beta)


def _release_probability(epsilon: float, w: float, dist: int) -> float:
    # P[dist + Lap(1/eps) < w]
    return laplace_cdf(1 / epsilon, w - dist)


def decoder_kernel(code: ParityCheckCode, a: BitString, epsilon: float, w: float) -> MechanismKernel:
    """Exact output law of the decoder over ``{coset members} + {bottom}`` for every input."""
    inputs = enumerate_datasets(BITS, code.n)
    coset = AffineCoset(code, a)
    members = [BitString(code.n, int(m)) for m in coset.members()]
    outputs = Domain(tuple(m.to_tuple() for m in members) + (BOT,))
    rows = np.zeros((inputs.size, outputs.size))
    for i in range(inputs.size):
        decoded, dist = nearest_codeword(coset, BitString(code.n, i))
        p = _release_probability(epsilon, w, dist)
        rows[i, outputs.index(decoded.to_tuple())] = p
        rows[i, -1] = 1 - p
    return MechanismKernel(inputs, outputs, rows)


def composition_joint(code: ParityCheckCode, epsilon: float, w: float) -> JointPMF:
    """Exact joint of uniform ``x`` and the composed output (``x`` itself or bottom)."""
    inputs = enumerate_datasets(BITS, code.n)
    outputs = Domain(inputs.labels + (BOT,))
    p = _release_probability(epsilon, w, 0)
    size = inputs.size
    mass = np.zeros((size, size + 1))
    mass[np.arange(size), np.arange(size)] = p / size
    mass[:, -1] = (1 - p) / size
    return JointPMF(inputs, outputs, mass)


def fixed_syndrome_maxinfo(code: ParityCheckCode, a: BitString, epsilon: float, w: float, beta: float):
    """Exact beta-approximate max-information between uniform ``x`` and the decoder output."""
    kernel = decoder_kernel(code, a, epsilon, w)
    return approx_max_info(joint_from_kernel(PMF.uniform(kernel.input_domain), kernel), beta)
