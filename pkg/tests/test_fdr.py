import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxinfo.bounds import pvalue_sensitivity_floor
from maxinfo.errors import ConfigInvalid, ParamOutOfRange
from maxinfo.fdr import (
    SimConfig,
    binomial_pvalue,
    mean_statistic,
    positive_counts,
    run_fdr_experiment,
    select_naive,
    select_noisy_max,
    selection_bound,
    statistic_sensitivity,
)
from maxinfo.prob import Domain

BINARY = Domain((0, 1))


def sigma(p, trials):
    return math.sqrt(p * (1 - p) / trials)


def test_pvalue_examples():
    assert binomial_pvalue(4, 4, exact=True) == Fraction(1, 16)
    assert binomial_pvalue(7, 0) == 1.0
    assert binomial_pvalue(2, 1, exact=True) == Fraction(3, 4)
    with pytest.raises(ParamOutOfRange):
        binomial_pvalue(3, 4)


@given(st.integers(1, 60), st.data())
def test_pvalue_matches_direct_sum(n, data):
    s = data.draw(st.integers(0, n))
    direct = Fraction(sum(math.comb(n, i) for i in range(s, n + 1)), 2**n)
    assert binomial_pvalue(n, s, exact=True) == direct
    assert binomial_pvalue(n, s) == pytest.approx(float(direct), rel=1e-15)


def test_pvalue_super_uniform():
    n, trials = 50, 200_000
    rng = np.random.default_rng(3)
    tails = np.array([binomial_pvalue(n, s) for s in range(n + 1)])
    p = tails[rng.binomial(n, 0.5, size=trials)]
    for gamma in np.linspace(0.01, 0.99, 25):
        assert np.mean(p <= gamma) <= gamma + 3 * sigma(gamma, trials)


def test_naive_single_positive_feature():
    data = -np.ones((5, 3), dtype=int)
    data[:, 1] = 1
    assert select_naive(data) == 1


def test_naive_tie_goes_to_lowest_index():
    data = np.array([[1, 1, -1], [1, 1, -1]])
    assert select_naive(data) == 0


@given(st.integers(0, 2**32 - 1))
def test_naive_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    data = 2 * rng.integers(0, 2, size=(7, 5)) - 1
    counts = [sum(1 for v in data[:, j] if v > 0) for j in range(5)]
    best = max(counts)
    assert select_naive(data) == counts.index(best)
    assert positive_counts(data).tolist() == counts


def test_noisy_max_large_epsilon_is_naive():
    rng = np.random.default_rng(0)
    for _ in range(50):
        # distinct counts so the naive argmax is unique
        counts = rng.permutation(6)
        data = np.where(np.arange(6)[:, None] < counts[None, :], 1, -1)
        assert select_noisy_max(data, 1e6, rng) == select_naive(data)


def test_noisy_max_small_epsilon_near_uniform():
    rng = np.random.default_rng(1)
    data = np.array([[1, 1, 1, 1], [-1, -1, -1, -1]])
    trials = 10_000
    picks = np.bincount([select_noisy_max(data, 0.01, rng) for _ in range(trials)], minlength=4)
    assert np.all(np.abs(picks / trials - 0.25) <= 3 * sigma(0.25, trials))


def test_noisy_max_rejects_nonpositive_epsilon():
    with pytest.raises(ParamOutOfRange):
        select_noisy_max(np.ones((2, 2)), 0, np.random.default_rng(0))


def test_noisy_max_selection_frequencies_respect_privacy():
    # neighbors differ in one record of feature 0; compare sampled selection frequencies
    eps, trials = 1.0, 40_000
    x = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    x_prime = x.copy()
    x_prime[3, 0] = 1
    for first, second in ((x, x_prime), (x_prime, x)):
        rng_a, rng_b = np.random.default_rng(10), np.random.default_rng(11)
        pa = np.mean([select_noisy_max(first, eps, rng_a) == 0 for _ in range(trials)])
        pb = np.mean([select_noisy_max(second, eps, rng_b) == 0 for _ in range(trials)])
        slack = 3 * (sigma(pa, trials) + math.exp(eps) * sigma(pb, trials))
        assert pa <= math.exp(eps) * pb + slack
        assert 1 - pa <= math.exp(eps) * (1 - pb) + slack


def test_single_feature_has_no_inflation():
    cfg = SimConfig(n=100, m=1, trials=10_000, seed=4)
    r = run_fdr_experiment(cfg)
    assert r.naive_fdr <= cfg.alpha + 3 * sigma(cfg.alpha, cfg.trials)


def test_naive_selection_inflates_false_discovery():
    cfg = SimConfig(n=100, m=50, trials=2_000, seed=5)
    r = run_fdr_experiment(cfg)
    # independent continuous p-values would give 1 - 0.95^50; discrete ones can only do worse for the analyst
    assert 5 * cfg.alpha <= r.naive_fdr <= 1 - 0.95**50 + 3 * sigma(0.92, cfg.trials)


def test_noisy_max_correction_controls_false_discovery():
    cfg = SimConfig(n=200, m=20, trials=4_000, selector="noisy_max", epsilon=0.1, seed=6)
    r = run_fdr_experiment(cfg)
    assert r.gamma_used > 0
    assert r.corrected_fdr <= cfg.alpha + 3 * sigma(cfg.alpha, cfg.trials)
    assert r.corrected_fdr <= r.naive_fdr


def test_selection_bound_choice():
    noisy = SimConfig(n=400, m=100, trials=1, selector="noisy_max", epsilon=0.05)
    assert selection_bound(noisy).beta == pytest.approx(0.025)
    naive = SimConfig(n=400, m=64, trials=1)
    assert selection_bound(naive).k_bits == pytest.approx(6.0 + math.log2(1 / 0.025))


def test_report_shape():
    cfg = SimConfig(n=30, m=5, trials=50, seed=2)
    r = run_fdr_experiment(cfg)
    rows = r.rows()
    assert len(rows) == 50 and rows[0][0] == 0
    assert all(0 <= j < 5 and 0 < p <= 1 for _, j, p in rows)
    summary = r.selection_summary()
    assert sum(summary["counts"]) == 50
    assert len(r.to_dict()["digest"]) == 64


def test_digest_independent_of_workers():
    base = dict(n=40, m=8, trials=300, seed=11, selector="noisy_max", epsilon=0.5)
    one = run_fdr_experiment(SimConfig(**base, workers=1)).to_dict()
    two = run_fdr_experiment(SimConfig(**base, workers=2)).to_dict()
    assert one == two


def test_wider_data_keeps_first_m_features():
    a = run_fdr_experiment(SimConfig(n=20, m=4, trials=200, seed=1, d=10))
    assert a.selected.max() < 4


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(selector="greedy"),
        dict(n=0),
        dict(trials=0),
        dict(alpha=1.0),
        dict(d=3),
        dict(selector="noisy_max"),
        dict(selector="noisy_max", epsilon=-1.0),
        dict(beta_fraction=1.0),
    ],
)
def test_config_invalid(kwargs):
    base = dict(n=10, m=5, trials=10)
    base.update(kwargs)
    with pytest.raises(ConfigInvalid):
        SimConfig(**base)


def test_sensitivity_n4_exact():
    # p-value of the mean on 4 fair bits: weights 0..4 map to 1, 15/16, 11/16, 5/16, 1/16
    got = statistic_sensitivity(mean_statistic, 4, BINARY)
    assert got == pytest.approx(6 / 16, abs=1e-15)
    assert got >= pvalue_sensitivity_floor(4)


def test_sensitivity_n9():
    got = statistic_sensitivity(mean_statistic, 9, BINARY)
    assert got == pytest.approx(126 / 512, abs=1e-15)
    assert got >= 0.37 / 3


def test_sensitivity_constant_statistic():
    assert statistic_sensitivity(lambda x: 1.0, 5, BINARY) == 0.0


def test_sensitivity_single_dataset():
    assert statistic_sensitivity(mean_statistic, 3, Domain((0,))) == 0.0
