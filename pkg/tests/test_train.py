import numpy as np
import pytest

from hgx.data import HyperDataset, SyntheticSpec, generate_synthetic
from hgx.errors import DatasetError
from hgx.hypergraph import build_hypergraph
from hgx.linalg import Rng, max_singular_value
from hgx.nn import ModelConfig, init_params
from hgx.train import (
    depth_sweep,
    energy_probe,
    evaluate,
    stratified_masks,
    train,
)


@pytest.fixture(scope="module")
def easy_dataset():
    """Linearly separable two-class features on a small hypergraph."""
    spec = SyntheticSpec(
        num_nodes=80, num_classes=2, num_hyperedges=60, homophily=0.9,
        separation=6.0, noise_scale=0.5, feature_dim=6, seed=21,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="module")
def noisy_dataset():
    spec = SyntheticSpec(
        num_nodes=120, num_classes=3, num_hyperedges=80, homophily=0.9,
        separation=1.0, noise_scale=1.0, feature_dim=10, seed=33,
    )
    return generate_synthetic(spec)


class TestTrain:
    def test_separable_mlp(self, easy_dataset):
        config = ModelConfig(variant="mlp", num_layers=2, hidden_dim=16,
                             dropout=0.0, epochs=150, patience=150, seed=1)
        _, report = train(easy_dataset, config)
        assert report.test_accuracy >= 0.95

    def test_deterministic_reports(self, noisy_dataset):
        config = ModelConfig(variant="deep-hgcn", num_layers=3, hidden_dim=8,
                             epochs=40, patience=40, seed=5)
        _, r1 = train(noisy_dataset, config)
        _, r2 = train(noisy_dataset, config)
        assert r1.to_json_dict() == r2.to_json_dict()

    def test_zero_learning_rate_constant_loss(self, noisy_dataset):
        # dropout off so the only possible variation is parameter drift
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             learning_rate=0.0, dropout=0.0, epochs=10,
                             patience=100, seed=2)
        _, report = train(noisy_dataset, config)
        losses = [e["train_loss"] for e in report.epochs]
        assert max(losses) - min(losses) < 1e-12

    def test_patience_zero_stops_at_first_non_improvement(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=200, patience=0, seed=3)
        _, report = train(noisy_dataset, config)
        signals = [e["val_acc"] for e in report.epochs]
        best = -np.inf
        first_bad = None
        for i, s in enumerate(signals, start=1):
            if s > best:
                best = s
            else:
                first_bad = i
                break
        assert first_bad is not None
        assert len(report.epochs) == first_bad

    def test_best_epoch_has_best_signal(self, noisy_dataset):
        config = ModelConfig(variant="deep-hgcn", num_layers=2, hidden_dim=8,
                             epochs=60, patience=60, seed=6)
        _, report = train(noisy_dataset, config)
        signals = [e["val_acc"] for e in report.epochs]
        best = max(signals)
        assert signals[report.best_epoch - 1] == best
        # ties resolve to the earliest epoch
        assert report.best_epoch - 1 == signals.index(best)

    def test_signal_without_val_mask_is_loss(self, noisy_dataset):
        ds = HyperDataset(
            hypergraph=noisy_dataset.hypergraph,
            features=noisy_dataset.features,
            labels=noisy_dataset.labels,
            train_mask=noisy_dataset.train_mask,
            test_mask=noisy_dataset.test_mask,
            val_mask=None,
            num_classes=noisy_dataset.num_classes,
        )
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=20, patience=20, seed=4)
        _, report = train(ds, config)
        assert report.early_stop_signal == "train_loss"
        assert "val_acc" not in report.epochs[0]

    def test_empty_train_mask_rejected(self, noisy_dataset):
        ds = HyperDataset(
            hypergraph=noisy_dataset.hypergraph,
            features=noisy_dataset.features,
            labels=noisy_dataset.labels,
            train_mask=[],
            test_mask=noisy_dataset.test_mask,
            num_classes=noisy_dataset.num_classes,
        )
        config = ModelConfig(variant="hgnn", num_layers=1, hidden_dim=4, epochs=1)
        with pytest.raises(DatasetError, match="train mask"):
            train(ds, config)

    def test_float32_training_runs(self, noisy_dataset):
        config = ModelConfig(variant="deep-hgcn", num_layers=2, hidden_dim=8,
                             epochs=10, patience=10, seed=8, precision=32)
        _, report = train(noisy_dataset, config)
        assert 0.0 <= report.test_accuracy <= 1.0


class TestEvaluate:
    def test_matches_manual_argmax(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=15, patience=15, seed=9)
        params, report = train(noisy_dataset, config)
        acc = evaluate(params, noisy_dataset, noisy_dataset.test_mask, config)
        assert acc == pytest.approx(report.test_accuracy, abs=1e-12)

    def test_zero_params_tie_to_class_zero(self, noisy_dataset):
        config = ModelConfig(variant="mlp", num_layers=1, hidden_dim=4)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(0).stream("init"))
        params.theta_out[:] = 0.0
        mask = noisy_dataset.test_mask
        acc = evaluate(params, noisy_dataset, mask, config)
        expected = float(np.mean(noisy_dataset.labels[mask] == 0))
        assert acc == pytest.approx(expected, abs=1e-12)

    def test_random_model_near_chance(self):
        # 10k balanced binary nodes, untrained random weights
        rng = np.random.default_rng(0)
        n = 10_000
        g = build_hypergraph(n, [[i, (i + 1) % n] for i in range(n)])
        labels = np.array([i % 2 for i in range(n)])
        labels = labels[rng.permutation(n)]
        ds = HyperDataset(
            hypergraph=g,
            features=rng.normal(size=(n, 8)),
            labels=labels,
            train_mask=[0],
            test_mask=np.arange(1, n),
            num_classes=2,
        )
        config = ModelConfig(variant="mlp", num_layers=1, hidden_dim=8, seed=1)
        params = init_params(config, 8, 2, Rng(1).stream("init"))
        acc = evaluate(params, ds, ds.test_mask, config)
        assert 0.45 <= acc <= 0.55

    def test_empty_mask_rejected(self, noisy_dataset):
        config = ModelConfig(variant="mlp", num_layers=1, hidden_dim=4)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(0).stream("init"))
        with pytest.raises(ValueError, match="non-empty"):
            evaluate(params, noisy_dataset, [], config)


class TestDepthSweep:
    def test_single_cell(self, easy_dataset):
        config = ModelConfig(variant="mlp", num_layers=2, hidden_dim=8,
                             epochs=20, patience=20, seed=0)
        report = depth_sweep(easy_dataset, [2], config, num_splits=1)
        assert len(report.rows) == 1
        assert report.rows[0]["depth"] == 2

    def test_aggregation_invariants(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=15, patience=15, seed=10)
        report = depth_sweep(noisy_dataset, [1, 2], config, num_splits=3)
        assert len(report.rows) == 6
        for s in report.summary():
            accs = s["per_split"]
            assert s["mean_acc"] == pytest.approx(float(np.mean(accs)), abs=1e-15)
            assert s["std_acc"] >= 0.0
            assert min(accs) <= s["mean_acc"] <= max(accs)

    def test_rows_sorted_and_deterministic(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=10, patience=10, seed=11)
        r1 = depth_sweep(noisy_dataset, [2, 1], config, num_splits=2)
        r2 = depth_sweep(noisy_dataset, [2, 1], config, num_splits=2)
        assert r1.rows == r2.rows
        assert [r["depth"] for r in r1.rows] == [1, 1, 2, 2]

    def test_csv_shape(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=8,
                             epochs=5, patience=5, seed=12)
        report = depth_sweep(noisy_dataset, [1, 2], config, num_splits=2)
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == "variant,depth,split,seed,test_acc,best_epoch"
        assert len(lines) == 5


class TestStratifiedMasks:
    def test_preserves_sizes_and_disjoint(self, noisy_dataset):
        resampled = stratified_masks(noisy_dataset, seed=123)
        assert resampled.train_mask.size == noisy_dataset.train_mask.size
        assert resampled.val_mask.size == noisy_dataset.val_mask.size
        assert np.intersect1d(resampled.train_mask, resampled.test_mask).size == 0

    def test_stratification(self, noisy_dataset):
        resampled = stratified_masks(noisy_dataset, seed=7)
        labels = resampled.labels[resampled.train_mask]
        counts = np.bincount(labels, minlength=resampled.num_classes)
        assert np.all(counts >= 1)

    def test_different_seed_different_masks(self, noisy_dataset):
        a = stratified_masks(noisy_dataset, seed=1)
        b = stratified_masks(noisy_dataset, seed=2)
        assert not np.array_equal(a.train_mask, b.train_mask)


class TestEnergyProbe:
    def test_single_layer_two_points(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=1, hidden_dim=8, seed=0)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(0).stream("init"))
        trace = energy_probe(params, noisy_dataset, config)
        assert trace.layers == [0, 1]
        assert len(trace.energies) == 2
        assert trace.distances is not None and len(trace.distances) == 2

    def test_contractive_stack_decays(self, noisy_dataset):
        config = ModelConfig(variant="hgnn", num_layers=16, hidden_dim=8, seed=4)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(4).stream("init"))
        for i, w in enumerate(params.layer_weights):
            params.layer_weights[i] = w * (0.9 / max_singular_value(w))
        trace = energy_probe(params, noisy_dataset, config)
        assert trace.energies[-1] / trace.energies[0] < 1e-6

    def test_residual_model_retains_energy(self, noisy_dataset):
        config = ModelConfig(variant="deep-hgcn", num_layers=16, hidden_dim=8,
                             alpha=0.1, lambda_id=0.5, seed=4)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(4).stream("init"))
        trace = energy_probe(params, noisy_dataset, config)
        assert trace.energies[-1] / trace.energies[0] > 1e-3

    def test_disconnected_omits_distances(self):
        g = build_hypergraph(6, [[0, 1, 2], [3, 4, 5]])
        rng = np.random.default_rng(3)
        ds = HyperDataset(
            hypergraph=g,
            features=rng.normal(size=(6, 4)),
            labels=[0, 0, 0, 1, 1, 1],
            train_mask=[0, 3],
            test_mask=[2, 5],
            num_classes=2,
        )
        config = ModelConfig(variant="hgnn", num_layers=2, hidden_dim=4, seed=0)
        params = init_params(config, 4, 2, Rng(0).stream("init"))
        trace = energy_probe(params, ds, config)
        assert trace.distances is None
        assert len(trace.energies) == 3

    def test_distances_shrink_toward_limit(self, noisy_dataset):
        config = ModelConfig(variant="shgcn", num_layers=30, hidden_dim=8, seed=2)
        params = init_params(config, noisy_dataset.feature_dim,
                             noisy_dataset.num_classes, Rng(2).stream("init"))
        trace = energy_probe(params, noisy_dataset, config)
        assert trace.distances[-1] < trace.distances[0]
