"""Adaptive selection of a test statistic on null data, with and without private selection."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .bounds import MaxInfoBound, description_length_bound, pure_dp_product_bound, pvalue_correction
from .errors import ConfigInvalid, ParamOutOfRange
from .harness import content_digest, run_trials, trial_rng
from .mechanisms import laplace_sample, neighbor_pairs
from .prob import Domain, enumerate_datasets

SELECTORS = ("naive", "noisy_max")


@lru_cache(maxsize=64)
def binomial_tail_table(n: int) -> tuple:
    """``P[Bin(n, 1/2) >= s]`` for ``s = 0..n``, as exact fractions."""
    counts = [math.comb(n, i) for i in range(n + 1)]
    tails, running = [0] * (n + 2), 0
    for s in range(n, -1, -1):
        running += counts[s]
        tails[s] = running
    return tuple(Fraction(t, 2**n) for t in tails[: n + 1])


@lru_cache(maxsize=64)
def _float_tails(n: int) -> np.ndarray:
    return np.array([float(t) for t in binomial_tail_table(n)])


def binomial_pvalue(n: int, successes: int, exact: bool = False):
    """One-sided p-value ``P[Bin(n, 1/2) >= successes]``."""
    if not 0 <= successes <= n:
        raise ParamOutOfRange("need 0 <= successes <= n")
    if exact:
        return binomial_tail_table(n)[successes]
    return float(_float_tails(n)[successes])


def positive_counts(data: np.ndarray) -> np.ndarray:
    """Number of ``+1`` entries per feature of ``n x d`` data in ``{-1, +1}``."""
    return (np.asarray(data) > 0).sum(axis=0)


def select_naive(data: np.ndarray) -> int:
    """Feature with the largest positive count; ties go to the lowest index."""
    return int(np.argmax(positive_counts(data)))


def select_noisy_max(data: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Report-noisy-max over positive counts with ``Lap(2/epsilon)`` noise."""
    if epsilon <= 0:
        raise ParamOutOfRange("epsilon must be positive")
    counts = positive_counts(data)
    noisy = counts + laplace_sample(2 / epsilon, rng, size=counts.shape)
    return int(np.argmax(noisy))


@dataclass(frozen=True)
class SimConfig:
    """Settings for :func:`run_fdr_experiment`.

    ``beta_fraction`` sets the share of ``alpha`` spent as the max-information
    slack ``beta``; the rest is left to the corrected threshold.
    """

    n: int
    m: int
    trials: int
    alpha: float = 0.05
    selector: str = "naive"
    epsilon: float | None = None
    seed: int = 0
    d: int | None = None
    beta_fraction: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ConfigInvalid(f"selector must be one of {SELECTORS}")
        if self.n < 1 or self.m < 1 or self.trials < 1:
            raise ConfigInvalid("n, m and trials must be positive")
        if not 0 < self.alpha < 1:
            raise ConfigInvalid("alpha must lie in (0, 1)")
        if self.features < self.m:
            raise ConfigInvalid("m must not exceed the data dimension d")
        if self.selector == "noisy_max" and not (self.epsilon and self.epsilon > 0):
            raise ConfigInvalid("noisy_max needs a positive epsilon")
        if not 0 < self.beta_fraction < 1:
            raise ConfigInvalid("beta_fraction must lie in (0, 1)")

    @property
    def features(self) -> int:
        return self.m if self.d is None else self.d

    def payload(self) -> dict:
        out = asdict(self)
        out.pop("workers")
        return out


def selection_bound(config: SimConfig) -> MaxInfoBound:
    """Max-information bound of the selector used to correct the threshold."""
    beta = config.alpha * config.beta_fraction
    if config.selector == "noisy_max":
        return pure_dp_product_bound(config.epsilon, config.n, beta)
    # Any selector over m candidates has log2(m)-bit output.
    return description_length_bound(math.log2(config.m), beta)


@dataclass(frozen=True)
class FdrReport:
    naive_fdr: float
    corrected_fdr: float
    gamma_used: float
    bound_used: MaxInfoBound
    trials: int
    config: SimConfig
    selected: np.ndarray = field(repr=False, compare=False)
    pvalues: np.ndarray = field(repr=False, compare=False)

    def selection_summary(self) -> dict:
        counts = np.bincount(self.selected, minlength=self.config.m)
        return {
            "distinct": int(np.count_nonzero(counts)),
            "most_frequent": int(np.argmax(counts)),
            "max_frequency": int(counts.max()),
            "counts": counts.tolist(),
        }

    def payload(self) -> dict:
        t = self.trials
        return {
            "naive_fdr": self.naive_fdr,
            "corrected_fdr": self.corrected_fdr,
            "naive_sigma": math.sqrt(self.config.alpha * (1 - self.config.alpha) / t),
            "gamma_used": self.gamma_used,
            "bound_used": self.bound_used.to_dict(),
            "trials": t,
            "config": self.config.payload(),
            "selection": self.selection_summary(),
        }

    def to_dict(self) -> dict:
        out = self.payload()
        out["digest"] = content_digest(out)
        return out

    def rows(self) -> list[tuple[int, int, float]]:
        return [(i, int(j), float(p)) for i, (j, p) in enumerate(zip(self.selected, self.pvalues))]


def _fdr_chunk(start, stop, config: SimConfig):
    out = np.empty((stop - start, 2))
    tails = _float_tails(config.n)
    for i, t in enumerate(range(start, stop)):
        rng = trial_rng(config.seed, "fdr", t)
        data = 2 * rng.integers(0, 2, size=(config.n, config.features), dtype=np.int8) - 1
        data = data[:, : config.m]
        if config.selector == "naive":
            j = select_naive(data)
        else:
            j = select_noisy_max(data, config.epsilon, rng)
        out[i] = (j, tails[int((data[:, j] > 0).sum())])
    return out


def run_fdr_experiment(config: SimConfig) -> FdrReport:
    """Select one statistic per trial on fresh null data and test it at naive and corrected levels."""
    bound = selection_bound(config)
    gamma = pvalue_correction(bound.k_bits, bound.beta, config.alpha)
    results = run_trials(_fdr_chunk, config.trials, config.workers, config)
    selected = results[:, 0].astype(np.int64)
    pvalues = results[:, 1]
    return FdrReport(
        naive_fdr=float(np.mean(pvalues <= config.alpha)),
        corrected_fdr=float(np.mean(pvalues <= gamma)),
        gamma_used=gamma,
        bound_used=bound,
        trials=config.trials,
        config=config,
        selected=selected,
        pvalues=pvalues,
    )


def pvalue_map(statistic: Callable, n: int, domain: Domain, prior: np.ndarray | None = None):
    """Exact p-value ``P[phi(X) >= phi(x)]`` for every dataset ``x``.

    Returns:
        The dataset domain and the array of p-values in its order.
    """
    datasets = enumerate_datasets(domain, n)
    if prior is None:
        prior = np.full(datasets.size, 1 / datasets.size)
    values = np.array([statistic(datasets.labels[i]) for i in range(datasets.size)], dtype=np.float64)
    order = np.argsort(-values, kind="stable")
    sorted_vals = values[order]
    cum = np.cumsum(prior[order])
    # p(x) = mass of all datasets whose value is >= phi(x)
    last = np.searchsorted(-sorted_vals, -values, side="right") - 1
    return datasets, cum[last]


def statistic_sensitivity(statistic: Callable, n: int, domain: Domain, prior: np.ndarray | None = None) -> float:
    """Largest change of the composed p-value map between neighboring datasets."""
    datasets, pvals = pvalue_map(statistic, n, domain, prior)
    if datasets.size == 1:
        return 0.0
    left, right = neighbor_pairs(datasets)
    return float(np.max(np.abs(pvals[left] - pvals[right])))


def mean_statistic(dataset) -> float:
    return float(np.mean(dataset))
