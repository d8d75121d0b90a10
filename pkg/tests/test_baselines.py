import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tscore import (
    MmdConfig,
    ProbeConfig,
    a_distance_from_error,
    c_entropy,
    mmd,
    pearson,
    proxy_a_distance,
)
from tscore.baselines import median_bandwidth


def brute_force_mmd(source, target, sigma, estimator):
    """O(n^2) double-loop Gaussian-kernel evaluation."""

    def kernel(a, b):
        return math.exp(-sum((x - y) ** 2 for x, y in zip(a, b)) / (2.0 * sigma**2))

    ns, nt = len(source), len(target)
    kss = [[kernel(a, b) for b in source] for a in source]
    ktt = [[kernel(a, b) for b in target] for a in target]
    kst = [[kernel(a, b) for b in target] for a in source]
    mean_st = sum(map(sum, kst)) / (ns * nt)
    if estimator == "biased":
        return (
            sum(map(sum, kss)) / ns**2 + sum(map(sum, ktt)) / nt**2 - 2.0 * mean_st
        )
    ss = sum(kss[i][j] for i in range(ns) for j in range(ns) if i != j) / (ns * (ns - 1))
    tt = sum(ktt[i][j] for i in range(nt) for j in range(nt) if i != j) / (nt * (nt - 1))
    return ss + tt - 2.0 * mean_st


class TestMmd:
    def test_identical_inputs_biased_is_zero(self, rng):
        x = rng.standard_normal((20, 3))
        assert abs(mmd(x, x, MmdConfig(estimator="biased"))) <= 1e-12

    def test_matches_double_loop_oracle(self, rng):
        source = rng.standard_normal((5, 2))
        target = rng.standard_normal((4, 2))
        sigma = median_bandwidth(np.vstack([source, target]))
        for estimator in ("biased", "unbiased"):
            expected = brute_force_mmd(source.tolist(), target.tolist(), sigma, estimator)
            got = mmd(source, target, MmdConfig(estimator=estimator))
            assert got == pytest.approx(expected, abs=1e-12)

    def test_separated_distributions_give_large_value(self):
        rng = np.random.default_rng(0)
        source = rng.normal(0.0, 1.0, size=(200, 1))
        target = rng.normal(5.0, 1.0, size=(200, 1))
        assert mmd(source, target, MmdConfig(estimator="unbiased")) > 0.5

    def test_symmetric(self, rng):
        s = rng.standard_normal((8, 2))
        t = rng.standard_normal((11, 2)) + 1.0
        for estimator in ("biased", "unbiased"):
            config = MmdConfig(estimator=estimator)
            assert mmd(s, t, config) == pytest.approx(mmd(t, s, config), abs=1e-12)

    def test_biased_nonnegative(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            s = rng.standard_normal((6, 2))
            t = rng.standard_normal((7, 2))
            assert mmd(s, t, MmdConfig(estimator="biased")) >= -1e-12

    def test_explicit_bandwidth(self, rng):
        s = rng.standard_normal((5, 1))
        t = rng.standard_normal((5, 1))
        expected = brute_force_mmd(s.tolist(), t.tolist(), 2.0, "biased")
        assert mmd(s, t, MmdConfig(kernel_bandwidth=2.0)) == pytest.approx(
            expected, abs=1e-12
        )

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError, match="dimension mismatch"):
            mmd(rng.standard_normal((5, 2)), rng.standard_normal((5, 3)))

    def test_too_few_samples(self, rng):
        with pytest.raises(ValueError, match="at least 2"):
            mmd(rng.standard_normal((1, 2)), rng.standard_normal((5, 2)))

    def test_degenerate_bandwidth_guard(self):
        x = np.zeros((3, 2))
        assert mmd(x, x) == pytest.approx(0.0, abs=1e-12)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="estimator"):
            MmdConfig(estimator="vstat")
        with pytest.raises(ValueError, match="bandwidth"):
            MmdConfig(kernel_bandwidth=-1.0)
        with pytest.raises(ValueError, match="bandwidth"):
            MmdConfig(kernel_bandwidth="auto")


class TestProxyADistance:
    def test_formula_arithmetic(self):
        assert a_distance_from_error(0.25) == pytest.approx(1.0, abs=1e-15)
        assert a_distance_from_error(0.5) == 0.0
        assert a_distance_from_error(0.0) == 2.0
        # worse-than-chance clamps to chance
        assert a_distance_from_error(0.7) == 0.0

    def test_same_distribution_near_zero(self):
        rng = np.random.default_rng(1)
        source = rng.standard_normal((500, 2))
        target = rng.standard_normal((500, 2))
        assert proxy_a_distance(source, target) <= 0.3

    def test_disjoint_clusters_near_two(self):
        rng = np.random.default_rng(2)
        source = rng.standard_normal((500, 2))
        target = rng.standard_normal((500, 2)) + [10.0, 0.0]
        assert proxy_a_distance(source, target) >= 1.5

    def test_range_and_determinism(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            s = rng.standard_normal((30, 3))
            t = rng.standard_normal((40, 3)) + 0.5
            config = ProbeConfig(seed=seed)
            value = proxy_a_distance(s, t, config)
            assert 0.0 <= value <= 2.0
            assert proxy_a_distance(s, t, config) == value

    def test_balances_unequal_domains(self, rng):
        # larger domain is subsampled: no crash, value still in range
        s = rng.standard_normal((200, 2))
        t = rng.standard_normal((15, 2)) + 8.0
        assert 0.0 <= proxy_a_distance(s, t) <= 2.0

    def test_too_few_samples(self, rng):
        with pytest.raises(ValueError, match="at least 10"):
            proxy_a_distance(rng.standard_normal((5, 2)), rng.standard_normal((50, 2)))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="train_fraction"):
            ProbeConfig(train_fraction=1.0)
        with pytest.raises(ValueError, match="learning_rate"):
            ProbeConfig(learning_rate=0.0)
        with pytest.raises(ValueError, match="iterations"):
            ProbeConfig(iterations=0)


class TestCEntropy:
    def test_one_hot_rows_give_zero(self):
        assert c_entropy(np.eye(4)[[0, 1, 2, 3, 0]]) == 0.0

    def test_uniform_rows_give_ln_k(self):
        p = np.full((6, 3), 1.0 / 3.0)
        assert c_entropy(p) == pytest.approx(math.log(3), abs=1e-12)

    def test_hand_computed(self):
        p = np.array([[0.5, 0.5], [1.0, 0.0]])
        assert c_entropy(p) == pytest.approx(math.log(2) / 2.0, abs=1e-12)

    def test_bounds(self, rng):
        p = rng.random((50, 5))
        p /= p.sum(axis=1, keepdims=True)
        assert 0.0 <= c_entropy(p) <= math.log(5)

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            c_entropy(np.array([[0.9, 0.3]]))


class TestPearson:
    def test_exact_positive_linear(self):
        x = np.arange(1.0, 11.0)
        assert pearson(x, 2.0 * x + 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_exact_negative_linear(self):
        x = np.arange(1.0, 11.0)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_computed_half(self):
        assert pearson([1.0, 2.0, 3.0], [1.0, 3.0, 2.0]) == pytest.approx(0.5, abs=1e-12)

    def test_constant_input_errors(self):
        with pytest.raises(ValueError, match="constant"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            pearson([1.0], [2.0])

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(0, 2**31 - 1),
        st.floats(0.1, 50.0),
        st.floats(-100.0, 100.0),
    )
    def test_invariant_under_positive_affine_transform(self, seed, scale, offset):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(20)
        y = rng.standard_normal(20)
        base = pearson(x, y)
        assert pearson(scale * x + offset, y) == pytest.approx(base, abs=1e-12)
        assert pearson(x, scale * y + offset) == pytest.approx(base, abs=1e-12)

    def test_always_in_unit_interval(self, rng):
        for _ in range(50):
            x = rng.standard_normal(8)
            y = rng.standard_normal(8)
            assert -1.0 <= pearson(x, y) <= 1.0
