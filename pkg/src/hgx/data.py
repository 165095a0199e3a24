"""Canonical dataset format, loading/saving, and synthetic generation.

A dataset couples a hypergraph with node features, class labels, and
train/test (optionally validation) masks. On disk it is a single JSON
document with sorted keys and shortest round-trip float formatting, so
saving the same dataset twice is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DatasetError
from .hypergraph import Hypergraph, build_hypergraph
from .linalg import Rng

__all__ = [
    "HyperDataset",
    "SyntheticSpec",
    "load_dataset",
    "save_dataset",
    "generate_synthetic",
]


@dataclass
class HyperDataset:
    """Hypergraph + features + labels + split masks, validated on construction."""

    hypergraph: Hypergraph
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    test_mask: np.ndarray
    num_classes: int
    val_mask: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.hypergraph.num_nodes
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.train_mask = _as_mask(self.train_mask, n, "train_mask")
        self.test_mask = _as_mask(self.test_mask, n, "test_mask")
        if self.val_mask is not None:
            self.val_mask = _as_mask(self.val_mask, n, "val_mask")
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise DatasetError(
                f"features: expected {n} rows, got shape {self.features.shape}"
            )
        if self.labels.shape != (n,):
            raise DatasetError(f"labels: expected {n} entries, got {self.labels.shape}")
        if self.num_classes < 1:
            raise DatasetError(f"num_classes must be positive, got {self.num_classes}")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DatasetError(
                f"labels must lie in 0..{self.num_classes - 1}, "
                f"found range {self.labels.min()}..{self.labels.max()}"
            )
        named = [("train_mask", self.train_mask), ("test_mask", self.test_mask)]
        if self.val_mask is not None:
            named.append(("val_mask", self.val_mask))
        for i in range(len(named)):
            for j in range(i + 1, len(named)):
                overlap = np.intersect1d(named[i][1], named[j][1])
                if overlap.size:
                    raise DatasetError(
                        f"{named[i][0]} and {named[j][0]} overlap on "
                        f"{overlap.size} node(s), e.g. node {overlap[0]}"
                    )

    @property
    def num_nodes(self) -> int:
        return self.hypergraph.num_nodes

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


def _as_mask(mask, n, name):
    mask = np.asarray(sorted(int(v) for v in mask), dtype=np.int64)
    if mask.size and (mask[0] < 0 or mask[-1] >= n):
        bad = mask[0] if mask[0] < 0 else mask[-1]
        raise DatasetError(f"{name}: node id {bad} outside 0..{n - 1}")
    if np.unique(mask).size != mask.size:
        raise DatasetError(f"{name}: contains duplicate node ids")
    return mask


def _expand_features(spec, path) -> np.ndarray:
    if not isinstance(spec, dict):
        raise DatasetError(f"{path}: expected an object with 'dense' or 'sparse'")
    if "dense" in spec:
        try:
            arr = np.asarray(spec["dense"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{path}.dense: not a numeric matrix ({exc})") from exc
        if arr.ndim != 2:
            raise DatasetError(f"{path}.dense: expected a 2-D matrix")
        return arr
    if "sparse" in spec:
        s = spec["sparse"]
        if not isinstance(s, dict) or "dim" not in s or "rows" not in s:
            raise DatasetError(f"{path}.sparse: expected keys 'dim' and 'rows'")
        dim = int(s["dim"])
        out = np.zeros((len(s["rows"]), dim))
        for i, row in enumerate(s["rows"]):
            idx = np.asarray(row.get("idx", []), dtype=np.int64)
            val = np.asarray(row.get("val", []), dtype=np.float64)
            if idx.shape != val.shape:
                raise DatasetError(
                    f"{path}.sparse.rows[{i}]: idx and val lengths differ"
                )
            if idx.size and (idx.min() < 0 or idx.max() >= dim):
                raise DatasetError(
                    f"{path}.sparse.rows[{i}]: column index outside 0..{dim - 1}"
                )
            out[i, idx] = val
        return out
    raise DatasetError(f"{path}: needs either a 'dense' or a 'sparse' encoding")


def load_dataset(path, ensure_self_edges: bool = False) -> HyperDataset:
    """Load and validate a dataset from the canonical JSON format."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise DatasetError(f"{path}: top level must be an object")

    required = ["num_nodes", "num_classes", "hyperedges", "features", "labels",
                "train_mask", "test_mask"]
    for key in required:
        if key not in doc:
            raise DatasetError(f"{path}: missing required field '{key}'")

    hypergraph = build_hypergraph(
        int(doc["num_nodes"]),
        doc["hyperedges"],
        doc.get("edge_weights"),
        ensure_self_edges=ensure_self_edges,
    )
    features = _expand_features(doc["features"], "features")
    return HyperDataset(
        hypergraph=hypergraph,
        features=features,
        labels=doc["labels"],
        train_mask=doc["train_mask"],
        test_mask=doc["test_mask"],
        val_mask=doc.get("val_mask"),
        num_classes=int(doc["num_classes"]),
        meta=dict(doc.get("meta", {})),
    )


def save_dataset(ds: HyperDataset, path) -> None:
    """Write the canonical JSON form: sorted keys, dense features, stable floats."""
    doc = {
        "num_nodes": ds.num_nodes,
        "num_classes": ds.num_classes,
        "hyperedges": [list(e) for e in ds.hypergraph.hyperedges],
        "edge_weights": [float(w) for w in ds.hypergraph.edge_weights],
        "features": {"dense": [[float(v) for v in row] for row in ds.features]},
        "labels": [int(v) for v in ds.labels],
        "train_mask": [int(v) for v in ds.train_mask],
        "test_mask": [int(v) for v in ds.test_mask],
        "meta": {str(k): str(v) for k, v in sorted(ds.meta.items())},
    }
    if ds.val_mask is not None:
        doc["val_mask"] = [int(v) for v in ds.val_mask]
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the planted-partition generator."""

    num_nodes: int = 200
    num_classes: int = 4
    num_hyperedges: int = 120
    mean_edge_size: float = 4.0
    homophily: float = 0.9
    feature_dim: int = 16
    separation: float = 1.0
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.homophily <= 1.0:
            raise ConfigError(f"homophily must lie in [0, 1], got {self.homophily}")
        for name in ("num_nodes", "num_classes", "num_hyperedges", "feature_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.mean_edge_size < 2.0:
            raise ConfigError(
                f"mean_edge_size must be >= 2, got {self.mean_edge_size}"
            )
        if self.num_classes > self.num_nodes:
            raise ConfigError("num_classes cannot exceed num_nodes")
        if self.noise_scale < 0.0 or self.separation < 0.0:
            raise ConfigError("separation and noise_scale must be nonnegative")


# Default stratified split fractions used when a generated dataset needs masks.
TRAIN_FRACTION = 0.1
VAL_FRACTION = 0.1


def generate_synthetic(spec: SyntheticSpec) -> HyperDataset:
    """Planted-partition hypergraph with Gaussian class-centered features.

    Each hyperedge is drawn inside a single class with probability
    ``homophily`` and across all nodes otherwise. Features are the node's
    class center plus Gaussian noise. Bridging edges are appended if the
    draw leaves the hypergraph disconnected (count recorded in meta).
    Masks are a stratified 10/10/80 train/val/test split.
    """
    rng = Rng(spec.seed)
    label_rng = rng.stream("labels")
    edge_rng = rng.stream("edges")
    feat_rng = rng.stream("features")
    split_rng = rng.stream("split")

    n, k = spec.num_nodes, spec.num_classes
    labels = np.array([i % k for i in range(n)], dtype=np.int64)
    labels = labels[label_rng.permutation(n)]
    class_members = [np.flatnonzero(labels == c) for c in range(k)]

    edges: list[list[int]] = []
    for _ in range(spec.num_hyperedges):
        size = 2 + int(edge_rng.poisson(spec.mean_edge_size - 2.0))
        if edge_rng.random() < spec.homophily:
            pool = class_members[int(edge_rng.integers(0, k))]
        else:
            pool = np.arange(n)
        size = min(size, pool.size)
        members = edge_rng.choice(pool, size=size, replace=False)
        edges.append(sorted(int(v) for v in members))

    bridges = _bridge_components(n, edges)
    edges.extend(bridges)

    hypergraph = build_hypergraph(n, edges)

    centers = feat_rng.normal(size=(k, spec.feature_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= spec.separation
    features = centers[labels] + spec.noise_scale * feat_rng.normal(
        size=(n, spec.feature_dim)
    )

    train, val, test = _stratified_split(
        labels, k, TRAIN_FRACTION, VAL_FRACTION, split_rng
    )
    meta = {
        "generator": "planted-partition",
        "homophily": repr(spec.homophily),
        "separation": repr(spec.separation),
        "noise_scale": repr(spec.noise_scale),
        "seed": str(spec.seed),
        "bridging_edges": str(len(bridges)),
    }
    return HyperDataset(
        hypergraph=hypergraph,
        features=features,
        labels=labels,
        train_mask=train,
        test_mask=test,
        val_mask=val,
        num_classes=k,
        meta=meta,
    )


def _bridge_components(n: int, edges: list[list[int]]) -> list[list[int]]:
    """Size-2 edges chaining together the components of a node set."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for edge in edges:
        for v in edge[1:]:
            union(edge[0], v)

    roots = sorted({find(v) for v in range(n)})
    reps = []
    seen = set()
    for v in range(n):
        r = find(v)
        if r not in seen:
            seen.add(r)
            reps.append(v)
    return [[reps[i], reps[i + 1]] for i in range(len(reps) - 1)]


def _stratified_split(labels, num_classes, train_frac, val_frac, rng: Rng):
    """Per-class proportional sampling into train/val/test masks."""
    train, val, test = [], [], []
    for c in range(num_classes):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        n_train = max(1, int(round(train_frac * members.size)))
        n_val = int(round(val_frac * members.size))
        train.extend(members[:n_train])
        val.extend(members[n_train:n_train + n_val])
        test.extend(members[n_train + n_val:])
    return (
        np.array(sorted(train), dtype=np.int64),
        np.array(sorted(val), dtype=np.int64),
        np.array(sorted(test), dtype=np.int64),
    )
