import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxinfo.bounds import (
    LOG2E,
    MaxInfoBound,
    PrivacyParams,
    approx_dp_product_bound,
    compose,
    description_length_bound,
    dp_to_mi_bound,
    generalization_tail,
    maxinfo_to_mi,
    mi_pvalue_correction,
    mi_to_maxinfo,
    pure_dp_bound,
    pure_dp_product_bound,
    pvalue_correction,
    pvalue_sensitivity_floor,
    rz_pvalue_correction,
)
from maxinfo.errors import HypothesisViolated, InvalidBeta, ParamOutOfRange

REL = 1e-12


def test_pure_examples():
    assert pure_dp_bound(0, 5).k_bits == 0
    assert pure_dp_bound(math.log(2), 1).k_bits == pytest.approx(1.0, rel=REL)
    assert pure_dp_bound(0.5, 100).k_bits == pytest.approx(50 / math.log(2), rel=REL)


def test_pure_product_examples():
    assert pure_dp_product_bound(0, 10, 0.1).k_bits == 0
    with pytest.raises(InvalidBeta):
        pure_dp_product_bound(0.1, 10, 2)
    # eps^2 n / 2 = 0.5 here
    want = (0.5 + 0.1 * math.sqrt(50 * math.log(40))) / math.log(2)
    assert pure_dp_product_bound(0.1, 100, 0.05).k_bits == pytest.approx(want, rel=REL)


def _nu_oracle(eps, dh):
    # quadratic denominator written as a square
    a = math.exp(3 * eps)
    quad = 2 * LOG2E * (4 * a**4 + 4 * a**3 - 3 * a**2 - 2 * a + 1) / (a - 1) ** 2
    lin = 24 * a**2 / (1 - 1 / a) + LOG2E * (2 * a + 1)
    return 72 * eps**2 + dh * lin + dh**2 * quad


def test_approx_product_breakdown():
    eps, delta, n = 0.25, 1e-8, 400
    b = approx_dp_product_bound(PrivacyParams(eps, delta), n)
    bd = b.breakdown
    dh = math.sqrt(eps * delta) / 15
    assert bd.delta_hat == pytest.approx(math.sqrt(2.5e-9) / 15, rel=REL)
    assert bd.delta_hat <= eps / 15
    assert bd.nu == pytest.approx(_nu_oracle(eps, dh), rel=1e-10)
    assert bd.azuma_t == pytest.approx(eps * math.sqrt(2 * n), rel=REL)
    assert b.k_bits == pytest.approx(400 * bd.nu + 6 * math.sqrt(2) * 0.0625 * 400, rel=1e-12)
    dp = 2 * delta / dh + 2 * delta / (1 - math.exp(-eps))
    ddp = 2 * dh / (1 - math.exp(-3 * eps))
    assert bd.delta_prime == pytest.approx(dp, rel=REL)
    assert bd.delta_dprime == pytest.approx(ddp, rel=REL)
    assert bd.beta_raw == pytest.approx(math.exp(-(eps**2) * n) + n * (dp + ddp), rel=1e-12)


def test_approx_product_hypotheses():
    with pytest.raises(ParamOutOfRange):
        approx_dp_product_bound(PrivacyParams(0.5, 0.6), 10)
    with pytest.raises(ParamOutOfRange):
        approx_dp_product_bound(PrivacyParams(0.6, 0.1), 10)
    approx_dp_product_bound(PrivacyParams(0.5, 0.4), 10)


def test_approx_product_tiny_delta():
    b = approx_dp_product_bound(PrivacyParams(0.5, 1e-30), 10)
    assert math.isfinite(b.k_bits)
    assert b.breakdown.beta_azuma_term == pytest.approx(math.exp(-2.5), rel=REL)
    assert b.breakdown.beta_exp_form == pytest.approx(b.breakdown.beta_azuma_term, rel=REL)
    assert b.beta == pytest.approx(math.exp(-2.5), rel=1e-9)
    assert not b.vacuous


def test_approx_product_vacuous_flag():
    b = approx_dp_product_bound(PrivacyParams(0.1, 0.05), 50)
    assert b.vacuous and b.beta == 1.0 and b.breakdown.beta_raw > 1


def test_description_length_examples():
    assert description_length_bound(7, 1).k_bits == 7
    assert description_length_bound(0, 0.5).k_bits == 1
    assert description_length_bound(990, 2**-10).k_bits == 1000


def test_compose_examples():
    a = MaxInfoBound(1, 0.1, "x")
    b = MaxInfoBound(2, 0.2, "y")
    assert compose([a]) is a
    c = compose([a, b])
    assert (c.k_bits, c.beta) == (3, pytest.approx(0.3))
    z = compose([MaxInfoBound(0, 0, "z"), b])
    assert (z.k_bits, z.beta) == (2, 0.2)


def test_mi_to_maxinfo_examples():
    assert mi_to_maxinfo(1, 10).beta == pytest.approx(0.154, rel=REL)
    assert mi_to_maxinfo(0, 3).beta == pytest.approx(0.18, rel=REL)
    b = mi_to_maxinfo(2, 2.5)
    assert b.beta == 1.0 and b.vacuous


def test_slack_constant_dominates_entropy_term():
    w = np.linspace(0, 1 - 1e-12, 200001)
    assert np.max((1 - w) * np.log2(1 / (1 - w))) < 0.54


def test_maxinfo_to_mi_examples():
    assert maxinfo_to_mi(3, 0, 8) == pytest.approx(6 * math.log(2), rel=REL)
    want = 2 * math.log(2) + 0.1 * math.log2(10240) / 0.5
    assert maxinfo_to_mi(1, 0.05, 1024) == pytest.approx(want, rel=REL)
    with pytest.raises(HypothesisViolated):
        maxinfo_to_mi(1, 0.2, 4)


def test_dp_to_mi_examples():
    assert dp_to_mi_bound(PrivacyParams(0.5, 0), 100, 2) == pytest.approx(25)
    eps, delta, n = 0.5, 1e-12, 100
    scale = n * math.sqrt(delta / eps)
    want = 25 + scale * (1 + math.log(math.sqrt(eps / delta) / n) + n * 1.0)
    assert dp_to_mi_bound(PrivacyParams(eps, delta), n, 2) == pytest.approx(want, rel=REL)
    with pytest.raises(ParamOutOfRange):
        dp_to_mi_bound(PrivacyParams(0.6, 0), 100, 2)


def test_pvalue_correction_examples():
    assert pvalue_correction(0, 0, 0.05) == 0.05
    assert pvalue_correction(1, 0.01, 0.05) == pytest.approx(0.02, rel=REL)
    assert pvalue_correction(2, 0.06, 0.05) == 0


def test_mi_correction_examples():
    assert mi_pvalue_correction(0.46, 0.1) == pytest.approx(0.05 * 2**-20, rel=1e-10)
    assert mi_pvalue_correction(0, 1) == pytest.approx(0.5 * 2**-1.08, rel=REL)
    vals = [mi_pvalue_correction(m, 0.05) for m in (0, 1, 10, 100)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_rz_examples():
    assert rz_pvalue_correction(0, 0.05) == 0.025
    assert rz_pvalue_correction(1, 0.05) == pytest.approx(0.5 * math.exp(-400), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.001, 0.005, 0.01, 0.02, 0.05])
@pytest.mark.parametrize("m", [0.05, 0.1, 0.5, 1, 5, 20])
def test_mi_correction_dominates_rz(alpha, m):
    assert mi_pvalue_correction(m, alpha) >= rz_pvalue_correction(m, alpha)


def test_generalization_tail_examples():
    assert generalization_tail(0, 0, 10, 1, 0) == 1
    assert generalization_tail(0, 0, 100, 1, 100) == pytest.approx(math.exp(-200), rel=1e-12)
    assert generalization_tail(10, 0.01, 100, 0.01, 1) == pytest.approx(0.01, rel=REL)
    assert generalization_tail(5000, 0, 1, 1, 1) == 1


def test_sensitivity_floor_examples():
    assert pvalue_sensitivity_floor(1) == pytest.approx(0.37)
    assert pvalue_sensitivity_floor(100) == pytest.approx(0.037)
    assert pvalue_sensitivity_floor(10**12) < 1e-6


@given(st.floats(0.01, 0.5), st.floats(0.01, 0.5), st.integers(1, 500), st.integers(0, 500))
def test_monotone_in_eps_and_n(e1, e2, n, dn):
    lo, hi = sorted((e1, e2))
    assert pure_dp_bound(lo, n).k_bits <= pure_dp_bound(hi, n + dn).k_bits
    delta = lo / 10
    a = approx_dp_product_bound(PrivacyParams(lo, delta), n)
    b = approx_dp_product_bound(PrivacyParams(hi, delta), n + dn)
    assert a.k_bits <= b.k_bits * (1 + 1e-12)
    c = approx_dp_product_bound(PrivacyParams(lo, delta), n + dn)
    assert a.beta <= c.beta * (1 + 1e-12)


def test_beta_not_monotone_in_n_for_negligible_delta():
    # the Azuma term dominates and shrinks with n
    b1 = approx_dp_product_bound(PrivacyParams(0.5, 1e-30), 1)
    b2 = approx_dp_product_bound(PrivacyParams(0.5, 1e-30), 2)
    assert b2.beta < b1.beta


@given(st.floats(0.01, 0.5), st.integers(1, 10_000))
def test_small_delta_limit(eps, n):
    b = approx_dp_product_bound(PrivacyParams(eps, 1e-300), n)
    assert b.k_bits >= 0
    assert b.k_bits == pytest.approx(n * 72 * eps**2 + 6 * math.sqrt(2) * eps**2 * n, rel=1e-9)


@given(st.floats(0, 20), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_correction_monotone(k, beta, a1, a2):
    lo, hi = sorted((a1, a2))
    assert pvalue_correction(k, beta, lo) <= pvalue_correction(k, beta, hi)
    assert pvalue_correction(k + 1, beta, hi) <= pvalue_correction(k, beta, hi)
    assert pvalue_correction(k, min(1, beta + 0.1), hi) <= pvalue_correction(k, beta, hi)


@given(st.floats(0, 50), st.floats(0, 1))
def test_beta_is_probability(k, beta):
    for b in (mi_to_maxinfo(k, 1 + k), description_length_bound(k, max(beta, 1e-9))):
        assert 0 <= b.beta <= 1 and b.k_bits >= 0
