"""Full-batch semi-supervised training, depth sweeps, and energy probes."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import HyperDataset
from .errors import DatasetError
from .hypergraph import is_connected, laplacian, propagation_matrix
from .linalg import Rng
from .nn import (
    AdamState,
    ModelConfig,
    ModelParams,
    adam_step,
    cross_entropy_masked,
    init_params,
    model_backward,
    model_forward,
)
from .spectral import EnergyTrace, dirichlet_energy, smoothing_limit, spmm

__all__ = [
    "TrainReport",
    "SweepReport",
    "train",
    "evaluate",
    "depth_sweep",
    "energy_probe",
    "stratified_masks",
]


@dataclass
class TrainReport:
    """Per-epoch metrics and the outcome of one training run.

    ``wall_clock_seconds`` is context only; it is excluded from the
    serialized report so identical runs produce identical files.
    """

    config: dict
    epochs: list[dict]
    best_epoch: int
    test_accuracy: float
    seed: int
    early_stop_signal: str
    wall_clock_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "test_accuracy": self.test_accuracy,
            "seed": self.seed,
            "early_stop_signal": self.early_stop_signal,
        }


@dataclass
class SweepReport:
    """Aggregated accuracies of a (depth x split) grid."""

    variant: str
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> list[dict]:
        """One row per depth: mean and standard deviation over splits."""
        by_depth: dict[int, list[float]] = {}
        for row in self.rows:
            by_depth.setdefault(row["depth"], []).append(row["test_acc"])
        out = []
        for depth in sorted(by_depth):
            accs = np.array(by_depth[depth])
            out.append(
                {
                    "depth": depth,
                    "mean_acc": float(np.mean(accs)),
                    "std_acc": float(np.std(accs)),
                    "per_split": [float(a) for a in accs],
                }
            )
        return out

    def to_csv(self) -> str:
        lines = ["variant,depth,split,seed,test_acc,best_epoch"]
        for row in sorted(self.rows, key=lambda r: (r["depth"], r["split"])):
            lines.append(
                f"{self.variant},{row['depth']},{row['split']},{row['seed']},"
                f"{row['test_acc']!r},{row['best_epoch']}"
            )
        return "\n".join(lines) + "\n"


def _accuracy(logits: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    predicted = np.argmax(logits[mask], axis=1)
    return float(np.mean(predicted == labels[mask]))


def _propagation_for(dataset: HyperDataset, config: ModelConfig):
    if config.variant == "mlp":
        return None
    p = propagation_matrix(dataset.hypergraph)
    if config.precision == 32:
        p = p.astype(np.float32)
    return p


def train(dataset: HyperDataset, config: ModelConfig) -> tuple[ModelParams, TrainReport]:
    """Full-batch Adam with early stopping on the monitored signal.

    The signal is validation accuracy when the dataset has a validation
    mask, otherwise (negated) training loss; ties keep the earlier epoch.
    Training stops once the signal has not improved for ``patience``
    epochs, and the best-signal parameters are restored before the test
    accuracy is computed.
    """
    if dataset.train_mask.size == 0:
        raise DatasetError("training requires a non-empty train mask")
    started = time.perf_counter()

    rng = Rng(config.seed)
    params = init_params(
        config, dataset.feature_dim, dataset.num_classes, rng.stream("init")
    )
    dropout_rng = rng.stream("dropout")
    state = AdamState.for_params(params)
    p = _propagation_for(dataset, config)
    x = dataset.features.astype(config.dtype)
    labels = dataset.labels

    use_val = dataset.val_mask is not None and dataset.val_mask.size > 0
    signal_name = "val_acc" if use_val else "train_loss"

    best_signal = -np.inf
    best_epoch = 0
    best_params = params.copy()
    bad_epochs = 0
    history: list[dict] = []

    for epoch in range(1, config.epochs + 1):
        logits, tape = model_forward(params, p, x, config, "train", dropout_rng)
        loss, grad_logits = cross_entropy_masked(logits, labels, dataset.train_mask)
        grads = model_backward(tape, grad_logits, params, config, p)
        adam_step(params, grads, state, config.learning_rate)

        eval_logits, _ = model_forward(params, p, x, config, "eval")
        train_acc = _accuracy(eval_logits, labels, dataset.train_mask)
        entry = {"epoch": epoch, "train_loss": loss, "train_acc": train_acc}
        if use_val:
            entry["val_acc"] = _accuracy(eval_logits, labels, dataset.val_mask)
        history.append(entry)

        signal = entry["val_acc"] if use_val else -loss
        if signal > best_signal:
            best_signal = signal
            best_epoch = epoch
            best_params = params.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > config.patience:
                break

    test_logits, _ = model_forward(best_params, p, x, config, "eval")
    report = TrainReport(
        config=asdict(config),
        epochs=history,
        best_epoch=best_epoch,
        test_accuracy=_accuracy(test_logits, labels, dataset.test_mask),
        seed=config.seed,
        early_stop_signal=signal_name,
        wall_clock_seconds=time.perf_counter() - started,
    )
    return best_params, report


def evaluate(
    params: ModelParams,
    dataset: HyperDataset,
    mask: np.ndarray,
    config: ModelConfig,
    p=None,
) -> float:
    """Argmax accuracy over the masked nodes (ties go to the lowest class)."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("evaluation mask must be non-empty")
    if p is None:
        p = _propagation_for(dataset, config)
    logits, _ = model_forward(
        params, p, dataset.features.astype(config.dtype), config, "eval"
    )
    return _accuracy(logits, dataset.labels, mask)


def stratified_masks(dataset: HyperDataset, seed: int) -> HyperDataset:
    """Resample the dataset's masks stratified by class, preserving sizes.

    The replacement split keeps the original per-mask sizes (train, test,
    and validation when present) but redraws membership with the given
    seed, mirroring a fresh train/test split of the same protocol.
    """
    rng = Rng(seed).stream("split")
    labels = dataset.labels
    n_train = dataset.train_mask.size
    n_val = dataset.val_mask.size if dataset.val_mask is not None else 0

    train, val, test = [], [], []
    order = np.argsort(labels, kind="stable")
    per_class = [order[labels[order] == c] for c in range(dataset.num_classes)]
    n = labels.size
    for members in per_class:
        members = members[rng.permutation(members.size)]
        t = max(1, int(round(n_train * members.size / n)))
        v = int(round(n_val * members.size / n))
        train.extend(members[:t])
        val.extend(members[t:t + v])
        test.extend(members[t + v:])
    return HyperDataset(
        hypergraph=dataset.hypergraph,
        features=dataset.features,
        labels=dataset.labels,
        train_mask=np.array(sorted(train), dtype=np.int64),
        test_mask=np.array(sorted(test), dtype=np.int64),
        val_mask=np.array(sorted(val), dtype=np.int64) if n_val else None,
        num_classes=dataset.num_classes,
        meta=dict(dataset.meta),
    )


def depth_sweep(
    dataset: HyperDataset,
    depths: list[int],
    config: ModelConfig,
    num_splits: int = 1,
) -> SweepReport:
    """Train one model per (depth, split) and aggregate test accuracies.

    Split ``i`` redraws the masks and seeds the run with ``config.seed + i``
    so splits are independent but the whole sweep is reproducible.
    """
    report = SweepReport(variant=config.variant)
    for depth in depths:
        for split in range(num_splits):
            split_seed = config.seed + split
            split_ds = stratified_masks(dataset, split_seed) if num_splits > 1 else dataset
            run_config = replace(config, num_layers=depth, seed=split_seed)
            _, run = train(split_ds, run_config)
            report.rows.append(
                {
                    "depth": depth,
                    "split": split,
                    "seed": split_seed,
                    "test_acc": run.test_accuracy,
                    "best_epoch": run.best_epoch,
                }
            )
    report.rows.sort(key=lambda r: (r["depth"], r["split"]))
    return report


def energy_probe(
    params: ModelParams,
    dataset: HyperDataset,
    config: ModelConfig,
) -> EnergyTrace:
    """Layer-by-layer Dirichlet energy of an eval-mode forward pass.

    Alongside the energies, reports how far plain repeated smoothing of the
    input features has drifted toward the stationary pattern: the max-norm
    gap between row-normalized smoothed features and the row-normalized
    limit. The distance series is omitted for disconnected hypergraphs,
    where the limit is not unique.
    """
    p = propagation_matrix(dataset.hypergraph)
    delta = laplacian(dataset.hypergraph)
    x = dataset.features.astype(config.dtype)
    p_model = None if config.variant == "mlp" else p.astype(config.dtype)
    _, tape = model_forward(params, p_model, x, config, "eval")

    reps = [tape.x0] + [rec.h for rec in tape.layers]
    energies = [dirichlet_energy(delta, r.astype(np.float64)) for r in reps]
    layers = list(range(len(reps)))

    distances = None
    if is_connected(dataset.hypergraph):
        limit = smoothing_limit(dataset.hypergraph, dataset.features)
        limit_rows = _normalize_rows(limit)
        smoothed = dataset.features.astype(np.float64)
        distances = []
        for l in layers:
            if l > 0:
                smoothed = spmm(p, smoothed)
            distances.append(
                float(np.max(np.abs(_normalize_rows(smoothed) - limit_rows)))
            )
    return EnergyTrace(layers=layers, energies=energies, distances=distances)


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    return m / safe
