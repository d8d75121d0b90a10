import math

import numpy as np
import pytest

from tscore import (
    DomainSpec,
    MmdConfig,
    ToyTrainConfig,
    generate_domain_pair,
    loss_and_gradients,
    mmd,
    proxy_a_distance,
    train_toy_model,
    validate_record,
    write_run,
)
from tscore.synth import softmax


def small_spec(**kwargs):
    defaults = dict(n=60, shift=(0.5, 0.5, 0.5, 0.0, 0.0), seed=0)
    defaults.update(kwargs)
    return DomainSpec(**defaults)


class TestDomainSpec:
    def test_defaults_are_valid(self):
        spec = DomainSpec()
        assert spec.k == 3 and spec.d_in == 5 and spec.n == 300

    def test_rejects_small_n(self):
        with pytest.raises(ValueError, match="n >= 10k"):
            DomainSpec(n=20)

    def test_rejects_shift_length_mismatch(self):
        with pytest.raises(ValueError, match="shift"):
            DomainSpec(shift=(1.0, 2.0))

    def test_rejects_k_below_two(self):
        with pytest.raises(ValueError, match="2 classes"):
            DomainSpec(k=1, shift=(0.0,) * 5)

    def test_rejects_nonpositive_spread(self):
        with pytest.raises(ValueError, match="cluster_spread"):
            DomainSpec(cluster_spread=0.0)


class TestGenerateDomainPair:
    def test_balanced_labels(self):
        spec = DomainSpec(k=3, n=300)
        source, target = generate_domain_pair(spec)
        for domain in (source, target):
            counts = np.bincount(domain.labels, minlength=3)
            assert counts.tolist() == [100, 100, 100]

    def test_shapes(self):
        source, target = generate_domain_pair(small_spec())
        assert source.features.shape == (60, 5)
        assert target.features.shape == (60, 5)
        assert source.labels.shape == (60,)

    def test_deterministic_per_seed(self):
        a = generate_domain_pair(small_spec())
        b = generate_domain_pair(small_spec())
        np.testing.assert_array_equal(a[0].features, b[0].features)
        np.testing.assert_array_equal(a[1].features, b[1].features)

    def test_seed_changes_draws(self):
        a = generate_domain_pair(small_spec(seed=0))
        b = generate_domain_pair(small_spec(seed=1))
        assert not np.array_equal(a[0].features, b[0].features)

    def test_no_shift_means_same_distribution(self):
        spec = DomainSpec(n=200, shift=(0.0,) * 5, rotation_angle=0.0, seed=3)
        source, target = generate_domain_pair(spec)
        value = mmd(source.features, target.features, MmdConfig(estimator="unbiased"))
        # null-permutation spread of the unbiased estimator on this data
        pooled = np.vstack([source.features, target.features])
        rng = np.random.default_rng(0)
        nulls = []
        for _ in range(30):
            perm = rng.permutation(len(pooled))
            nulls.append(
                mmd(pooled[perm[:200]], pooled[perm[200:]], MmdConfig(estimator="unbiased"))
            )
        assert abs(value) <= 3.0 * np.std(nulls) + abs(np.mean(nulls))

    def test_large_shift_separates_domains(self):
        spec = DomainSpec(n=200, shift=(10.0, 0.0, 0.0, 0.0, 0.0), seed=4)
        source, target = generate_domain_pair(spec)
        assert proxy_a_distance(source.features, target.features) > 1.5

    def test_uneven_n_distributes_remainder(self):
        spec = DomainSpec(k=3, n=301, shift=(0.0,) * 5)
        source, _ = generate_domain_pair(spec)
        counts = np.bincount(source.labels, minlength=3)
        assert counts.tolist() == [101, 100, 100]


class TestGradients:
    def test_analytic_matches_central_differences(self):
        rng = np.random.default_rng(0)
        xs = rng.standard_normal((5, 3))
        ys = np.eye(2)[np.array([0, 1, 0, 1, 1])]
        xt = rng.standard_normal((5, 3))
        a = rng.standard_normal((4, 3)) * 0.3
        w = rng.standard_normal((4, 2)) * 0.3
        lam = 2.5
        _, grad_a, grad_w = loss_and_gradients(a, w, xs, ys, xt, lam)

        eps = 1e-6

        def loss_at(a_mat, w_mat):
            return loss_and_gradients(a_mat, w_mat, xs, ys, xt, lam)[0]

        for grad, mat in ((grad_a, a), (grad_w, w)):
            numeric = np.zeros_like(mat)
            for idx in np.ndindex(mat.shape):
                bump = np.zeros_like(mat)
                bump[idx] = eps
                if mat is a:
                    numeric[idx] = (loss_at(a + bump, w) - loss_at(a - bump, w)) / (2 * eps)
                else:
                    numeric[idx] = (loss_at(a, w + bump) - loss_at(a, w - bump)) / (2 * eps)
            rel = np.linalg.norm(grad - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel <= 1e-5

    def test_softmax_rows_sum_to_one(self, rng):
        logits = rng.standard_normal((20, 4)) * 50.0
        p = softmax(logits)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(p >= 0.0)


class TestTrainToyModel:
    def test_single_epoch_shapes(self):
        source, target = generate_domain_pair(small_spec())
        records = train_toy_model(source, target, ToyTrainConfig(epochs=1))
        assert len(records) == 1
        rec = records[0]
        assert rec.weights.shape == (4, 3)
        assert rec.features.shape == (60, 4)
        assert rec.probabilities.shape == (60, 3)
        assert rec.labels.shape == (60,)

    def test_records_pass_tensorio_validation(self):
        source, target = generate_domain_pair(small_spec())
        records = train_toy_model(source, target, ToyTrainConfig(epochs=4))
        for rec in records:
            validated = validate_record(rec)
            assert np.max(np.abs(rec.probabilities.sum(axis=1) - 1.0)) <= 1e-9
            assert validated.epoch == rec.epoch

    def test_epoch_indices_sequential(self):
        source, target = generate_domain_pair(small_spec())
        records = train_toy_model(source, target, ToyTrainConfig(epochs=5))
        assert [r.epoch for r in records] == [0, 1, 2, 3, 4]

    def test_deterministic_exports(self, tmp_path):
        source, target = generate_domain_pair(small_spec())
        config = ToyTrainConfig(epochs=3)
        for name in ("a", "b"):
            write_run(
                train_toy_model(source, target, config),
                tmp_path / name, "det", "unit-test",
            )
        for path_a in sorted((tmp_path / "a").iterdir()):
            path_b = tmp_path / "b" / path_a.name
            assert path_a.read_bytes() == path_b.read_bytes()

    def test_accuracy_non_decreasing_early_without_adaptation(self):
        source, target = generate_domain_pair(DomainSpec())
        records = train_toy_model(
            source, target, ToyTrainConfig(epochs=5, adapt_weight=0.0)
        )
        accs = [
            float(np.mean(np.argmax(r.probabilities, axis=1) == r.labels))
            for r in records
        ]
        assert all(b >= a for a, b in zip(accs, accs[1:]))

    def test_excessive_adaptation_causes_negative_transfer(self):
        # default spec, adapt_weight 50: the final accuracy must sit well
        # below the trajectory's peak (threshold frozen from the recorded
        # trajectory, which drops ~33 points)
        source, target = generate_domain_pair(DomainSpec())
        records = train_toy_model(source, target, ToyTrainConfig(adapt_weight=50.0))
        accs = [
            float(np.mean(np.argmax(r.probabilities, axis=1) == r.labels))
            for r in records
        ]
        assert max(accs) - accs[-1] >= 0.05

    def test_d_feat_lower_bound(self):
        source, target = generate_domain_pair(small_spec())
        with pytest.raises(ValueError, match="d_feat"):
            train_toy_model(source, target, ToyTrainConfig(d_feat=1))

    @pytest.mark.filterwarnings("ignore:overflow|invalid value")
    def test_divergence_reported_with_epoch(self):
        source, target = generate_domain_pair(small_spec())
        with pytest.raises(ValueError, match="diverged at epoch"):
            train_toy_model(
                source, target, ToyTrainConfig(epochs=60, learning_rate=1e4)
            )

    def test_dimension_mismatch(self):
        source, target = generate_domain_pair(small_spec())
        bad_target = target._replace(features=target.features[:, :4])
        with pytest.raises(ValueError, match="differ"):
            train_toy_model(source, bad_target, ToyTrainConfig())
