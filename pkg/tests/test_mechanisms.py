import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxinfo.errors import CapExceeded
from maxinfo.mechanisms import (
    BITS,
    geometric_count_kernel,
    laplace_cdf,
    laplace_sample,
    laplace_transform,
    neighbor_pairs,
    rr_kernel,
    verify_dp,
)
from maxinfo.prob import Domain, MechanismKernel, enumerate_datasets


def subset_oracle(kernel: MechanismKernel, epsilon: float) -> float:
    """Worst ``P[O] - e^eps P'[O]`` over every event and every neighbor pair, by brute force."""
    rows = np.asarray(kernel.rows, dtype=np.float64)
    m = kernel.output_domain.size
    masks = np.array(list(itertools.product([0, 1], repeat=m)), dtype=np.float64)
    left, right = neighbor_pairs(kernel.input_domain)
    p = masks @ rows[left].T
    q = masks @ rows[right].T
    return float(np.max(p - math.exp(epsilon) * q))


def test_rr_zero_epsilon_uniform():
    k = rr_kernel(0, 1)
    assert np.allclose(k.rows, 0.5)


def test_rr_truthful_probability():
    k = rr_kernel(math.log(3), 1)
    assert k.rows[0, 0] == pytest.approx(0.75, abs=1e-15)


def test_rr_large_epsilon_fails_smaller_target():
    k = rr_kernel(30.0, 1)
    assert not verify_dp(k, 29.0, 0).passes


def test_rr_rows_are_products():
    k = rr_kernel(0.7, 3)
    p = math.exp(0.7) / (1 + math.exp(0.7))
    # 000 -> 011 flips two bits
    assert k.rows[0, 3] == pytest.approx(p * (1 - p) ** 2, rel=1e-14)


def test_geometric_ratio_bounded():
    eps = 0.8
    k = geometric_count_kernel(eps, 4, 6)
    left, right = neighbor_pairs(k.input_domain)
    ratio = k.rows[left] / k.rows[right]
    assert ratio.max() <= math.exp(eps) * (1 + 1e-12)
    assert verify_dp(k, eps, 0).passes


def test_geometric_weight_preserving_rows_equal():
    k = geometric_count_kernel(0.5, 3, 3)
    d = k.input_domain
    assert np.array_equal(k.rows[d.index_of((0, 1, 0))], k.rows[d.index_of((1, 0, 0))])


def test_geometric_concentrates():
    k = geometric_count_kernel(40.0, 3, 5)
    d = k.input_domain
    assert k.rows[d.index_of((1, 1, 0)), 2] == pytest.approx(1.0, abs=1e-12)


def test_laplace_median():
    assert laplace_transform(0.5, 3.0) == 0.0


def test_laplace_cdf_examples():
    assert laplace_cdf(2.0, 0) == 0.5
    assert laplace_cdf(1.0, math.log(2)) == pytest.approx(0.75, abs=1e-15)
    for x in (-3.0, -0.2, 0.4, 5.0):
        assert laplace_cdf(1.3, -x) == pytest.approx(1 - laplace_cdf(1.3, x), abs=1e-15)


def test_laplace_tail_frequency():
    rng = np.random.default_rng(11)
    scale, tau, draws = 2.0, 1.5, 100_000
    sample = laplace_sample(scale, rng, size=draws)
    p = 0.5 * math.exp(-tau / scale)
    sigma = math.sqrt(p * (1 - p) / draws)
    assert abs(np.mean(sample >= tau) - p) <= 3 * sigma


def test_laplace_deterministic_stream():
    a = laplace_sample(1.0, np.random.default_rng(5), size=10)
    b = laplace_sample(1.0, np.random.default_rng(5), size=10)
    assert np.array_equal(a, b)
    # frozen: PCG64 stream of seed 0 through the inverse CDF
    c = laplace_sample(1.0, np.random.default_rng(0), size=3)
    assert c.tolist() == [0.3200997251577807, -0.6169764006206607, -2.50168199796295]


def test_neighbor_count():
    for radix, n in [(2, 3), (3, 2), (1, 4)]:
        d = enumerate_datasets(Domain(tuple(range(radix))), n)
        left, right = neighbor_pairs(d)
        counts = np.bincount(left, minlength=d.size)
        assert np.all(counts == n * (radix - 1))
        pairs = set(zip(left.tolist(), right.tolist()))
        assert all((b, a) in pairs for a, b in pairs)


def test_identity_kernel_fails_with_residual_one():
    d = enumerate_datasets(BITS, 2)
    v = verify_dp(MechanismKernel(d, d, np.eye(4)), 1.0, 0)
    assert not v.passes and v.worst_residual == 1.0
    assert v.worst_pair == ((0, 0), (0, 1))


def test_delta_one_always_passes():
    d = enumerate_datasets(BITS, 2)
    assert verify_dp(MechanismKernel(d, d, np.eye(4)), 0.0, 1.0).passes


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("n", range(1, 7))
def test_rr_passes_own_epsilon(eps, n):
    k = rr_kernel(eps, n)
    assert verify_dp(k, eps, 0).passes
    assert not verify_dp(k, eps - 0.01, 0).passes


def test_verify_cap():
    with pytest.raises(CapExceeded):
        verify_dp(rr_kernel(0.5, 4), 0.5, 0, cap=100)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.floats(0, 2))
def test_verifier_matches_subset_oracle(seed, n, eps):
    rng = np.random.default_rng(seed)
    d = enumerate_datasets(BITS, n)
    m = int(rng.integers(1, 9))
    rows = rng.dirichlet(np.ones(m), size=d.size)
    kernel = MechanismKernel(d, Domain(tuple(range(m))), rows)
    got = verify_dp(kernel, eps, 0).worst_residual
    assert got == pytest.approx(max(0.0, subset_oracle(kernel, eps)), abs=1e-12)


def test_verifier_matches_oracle_on_sixteen_outputs():
    kernel = rr_kernel(0.3, 4)
    assert kernel.output_domain.size == 16
    assert verify_dp(kernel, 0.2, 0).worst_residual == pytest.approx(subset_oracle(kernel, 0.2), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0, 1.5))
def test_post_processing_never_increases_residual(seed, eps):
    rng = np.random.default_rng(seed)
    d = enumerate_datasets(BITS, 2)
    m = int(rng.integers(2, 7))
    kernel = MechanismKernel(d, Domain(tuple(range(m))), rng.dirichlet(np.ones(m), size=d.size))
    images = rng.integers(0, 3, size=m)
    target = Domain(("a", "b", "c"))
    pushed = kernel.relabel(lambda y: target.labels[images[y]], target)
    assert verify_dp(pushed, eps, 0).worst_residual <= verify_dp(kernel, eps, 0).worst_residual + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_verdict_symmetric_under_swapping_inputs(seed):
    # relabeling the records swaps which dataset of each pair comes first
    rng = np.random.default_rng(seed)
    d = enumerate_datasets(BITS, 2)
    rows = rng.dirichlet(np.ones(3), size=d.size)
    flipped = rows[[d.index_of(tuple(1 - b for b in x)) for x in d.labels]]
    a = verify_dp(MechanismKernel(d, Domain((0, 1, 2)), rows), 0.3, 0)
    b = verify_dp(MechanismKernel(d, Domain((0, 1, 2)), flipped), 0.3, 0)
    assert a.worst_residual == pytest.approx(b.worst_residual, abs=1e-15)
