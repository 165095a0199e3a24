"""Model variants over hypergraph propagation, with analytical gradients.

Four forward architectures share one parameter layout (input transform,
K square hidden-layer weights, output transform, no biases):

* ``deep-hgcn``: residual-and-identity-mapped convolution; every layer
  mixes an ``alpha`` fraction of the first hidden representation back in
  and reparameterizes its weight as ``(1-beta)*I + beta*Theta`` with a
  depth-decaying ``beta``.
* ``hgnn``: plain convolution ``sigma(P X Theta)`` per layer.
* ``shgcn``: the linearized stack: propagate K times, then one collapsed
  linear map and softmax.
* ``mlp``: the convolution-free control (``P`` replaced by identity).

Training state (dropout masks, pre/post-activations) is captured on a
``ForwardTape`` so the backward pass is an exact reverse-mode sweep, and
replaying a tape reproduces its forward output bit for bit.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .linalg import (
    Rng,
    activation_derivative,
    elementwise_activation,
    row_softmax,
    spmm,
)

__all__ = [
    "ModelConfig",
    "ModelParams",
    "ForwardTape",
    "AdamState",
    "VARIANTS",
    "beta_schedule",
    "deep_hgcn_layer",
    "hgnn_layer",
    "shgcn_forward",
    "model_forward",
    "replay_forward",
    "cross_entropy_masked",
    "model_backward",
    "adam_step",
    "init_params",
    "save_checkpoint",
    "load_checkpoint",
]

VARIANTS = ("deep-hgcn", "hgnn", "shgcn", "mlp")

CHECKPOINT_MAGIC = b"HGCN"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """All hyperparameters of a training run."""

    variant: str = "deep-hgcn"
    num_layers: int = 2
    hidden_dim: int = 32
    alpha: float = 0.1
    lambda_id: float = 0.5
    dropout: float = 0.5
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 300
    patience: int = 100
    seed: int = 0
    precision: int = 64
    activation: str = "relu"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.num_layers < 1:
            raise ConfigError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.lambda_id < 0.0:
            raise ConfigError(f"lambda_id must be >= 0, got {self.lambda_id}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must lie in [0, 1), got {self.dropout}")
        if self.learning_rate < 0.0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.weight_decay < 0.0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.patience < 0:
            raise ConfigError(f"patience must be >= 0, got {self.patience}")
        if self.precision not in (32, 64):
            raise ConfigError(f"precision must be 32 or 64, got {self.precision}")
        if self.activation != "relu":
            raise ConfigError(f"only relu activation is supported, got {self.activation!r}")

    @property
    def dtype(self):
        return np.float32 if self.precision == 32 else np.float64


@dataclass
class ModelParams:
    """Learnable tensors: input transform, hidden layers, output transform."""

    theta_in: np.ndarray
    layer_weights: list[np.ndarray]
    theta_out: np.ndarray

    def tensors(self):
        """(name, array) pairs in declaration order."""
        yield "theta_in", self.theta_in
        for i, w in enumerate(self.layer_weights):
            yield f"layer_{i}", w
        yield "theta_out", self.theta_out

    def copy(self) -> "ModelParams":
        return ModelParams(
            theta_in=self.theta_in.copy(),
            layer_weights=[w.copy() for w in self.layer_weights],
            theta_out=self.theta_out.copy(),
        )


@dataclass
class _LayerRecord:
    mask: Optional[np.ndarray]
    z: Optional[np.ndarray]
    a: Optional[np.ndarray]
    h: np.ndarray


@dataclass
class ForwardTape:
    """Everything a backward pass (or a bit-exact replay) needs."""

    variant: str
    mode: str
    input_mask: Optional[np.ndarray]
    a0: np.ndarray
    x0: np.ndarray
    layers: list[_LayerRecord]
    final_mask: Optional[np.ndarray]
    h_final_dropped: np.ndarray
    x_dropped: np.ndarray
    logits: np.ndarray


def beta_schedule(layer_index: int, lambda_id: float) -> float:
    """Identity-mapping strength for a 1-based layer index: ln(lambda/l + 1).

    Decays monotonically with depth so deep layers default to near-identity
    transforms; zero lambda gives pure identity at every depth.
    """
    if layer_index < 1:
        raise ValueError(f"layer_index must be >= 1, got {layer_index}")
    if lambda_id < 0.0:
        raise ValueError(f"lambda_id must be >= 0, got {lambda_id}")
    return math.log(lambda_id / layer_index + 1.0)


def _dropout_mask(shape, rate, rng: Rng, dtype):
    keep = (rng.random(shape) >= rate).astype(dtype)
    return keep / (1.0 - rate)


def _maybe_dropout(x, rate, mode, rng):
    if mode != "train" or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("train-mode forward needs an rng for dropout masks")
    mask = _dropout_mask(x.shape, rate, rng, x.dtype)
    return x * mask, mask


def _identity_mapped(theta: np.ndarray, beta: float) -> np.ndarray:
    eye = np.eye(theta.shape[0], dtype=theta.dtype)
    return (1.0 - beta) * eye + beta * theta


def deep_hgcn_layer(
    p: sp.csr_array,
    x_l: np.ndarray,
    x_0: np.ndarray,
    alpha: float,
    beta: float,
    theta: np.ndarray,
    mode: str = "eval",
    dropout: float = 0.0,
    rng: Optional[Rng] = None,
) -> np.ndarray:
    """One residual-and-identity-mapped convolution layer.

    Computes ``relu(((1-alpha) P x_l + alpha x_0) @ ((1-beta) I + beta theta))``.
    In train mode, dropout is applied to ``x_l`` before propagation; the
    residual path always sees the clean ``x_0``.
    """
    out, _ = _deep_hgcn_layer_full(p, x_l, x_0, alpha, beta, theta, mode, dropout, rng)
    return out


def _deep_hgcn_layer_full(p, x_l, x_0, alpha, beta, theta, mode, dropout, rng):
    x_dropped, mask = _maybe_dropout(x_l, dropout, mode, rng)
    z = (1.0 - alpha) * spmm(p, x_dropped) + alpha * x_0
    a = z @ _identity_mapped(theta, beta)
    h = elementwise_activation(a, "relu")
    return h, _LayerRecord(mask=mask, z=z, a=a, h=h)


def hgnn_layer(
    p: sp.csr_array,
    x_l: np.ndarray,
    theta: np.ndarray,
    mode: str = "eval",
    dropout: float = 0.0,
    rng: Optional[Rng] = None,
) -> np.ndarray:
    """Plain hypergraph convolution layer: relu(P x_l @ theta)."""
    out, _ = _hgnn_layer_full(p, x_l, theta, mode, dropout, rng)
    return out


def _hgnn_layer_full(p, x_l, theta, mode, dropout, rng, propagate=True):
    x_dropped, mask = _maybe_dropout(x_l, dropout, mode, rng)
    z = spmm(p, x_dropped) if propagate else x_dropped
    a = z @ theta
    h = elementwise_activation(a, "relu")
    return h, _LayerRecord(mask=mask, z=z, a=a, h=h)


def shgcn_forward(p: sp.csr_array, x: np.ndarray, theta: np.ndarray, k: int) -> np.ndarray:
    """Linearized stack: softmax(P^k x @ theta) with one collapsed weight."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    h = np.asarray(x)
    for _ in range(k):
        h = spmm(p, h)
    return row_softmax(h @ theta)


def model_forward(
    params: ModelParams,
    p: Optional[sp.csr_array],
    x: np.ndarray,
    config: ModelConfig,
    mode: str = "eval",
    rng: Optional[Rng] = None,
) -> tuple[np.ndarray, ForwardTape]:
    """Full forward pass: input transform, K variant layers, output transform.

    Returns pre-softmax logits plus the tape of intermediates. Eval mode
    skips dropout and is deterministic; train mode draws masks from ``rng``.
    """
    dtype = config.dtype
    x = np.asarray(x, dtype=dtype)
    if x.shape[1] != params.theta_in.shape[0]:
        raise ValueError(
            f"feature dim {x.shape[1]} does not match input transform "
            f"{params.theta_in.shape}"
        )
    rate = config.dropout

    x_dropped, input_mask = _maybe_dropout(x, rate, mode, rng)
    a0 = x_dropped @ params.theta_in
    x0 = elementwise_activation(a0, "relu")

    records: list[_LayerRecord] = []
    h = x0
    if config.variant == "deep-hgcn":
        for l in range(1, config.num_layers + 1):
            beta = beta_schedule(l, config.lambda_id)
            h, rec = _deep_hgcn_layer_full(
                p, h, x0, config.alpha, beta, params.layer_weights[l - 1],
                mode, rate, rng,
            )
            records.append(rec)
    elif config.variant == "hgnn":
        for l in range(config.num_layers):
            h, rec = _hgnn_layer_full(p, h, params.layer_weights[l], mode, rate, rng)
            records.append(rec)
    elif config.variant == "mlp":
        for l in range(config.num_layers):
            h, rec = _hgnn_layer_full(
                None, h, params.layer_weights[l], mode, rate, rng, propagate=False
            )
            records.append(rec)
    elif config.variant == "shgcn":
        for _ in range(config.num_layers):
            h = spmm(p, h)
            records.append(_LayerRecord(mask=None, z=None, a=None, h=h))

    h_final_dropped, final_mask = _maybe_dropout(h, rate, mode, rng)
    logits = h_final_dropped @ params.theta_out

    tape = ForwardTape(
        variant=config.variant,
        mode=mode,
        input_mask=input_mask,
        a0=a0,
        x0=x0,
        layers=records,
        final_mask=final_mask,
        h_final_dropped=h_final_dropped,
        x_dropped=x_dropped,
        logits=logits,
    )
    return logits, tape


def replay_forward(
    params: ModelParams,
    p: Optional[sp.csr_array],
    x: np.ndarray,
    config: ModelConfig,
    tape: ForwardTape,
) -> np.ndarray:
    """Recompute the forward pass reusing the tape's dropout masks.

    Bit-identical to the tape's recorded logits when params and inputs
    are unchanged.
    """
    dtype = config.dtype
    x = np.asarray(x, dtype=dtype)
    x_dropped = x if tape.input_mask is None else x * tape.input_mask
    x0 = elementwise_activation(x_dropped @ params.theta_in, "relu")

    h = x0
    if config.variant == "deep-hgcn":
        for l in range(1, config.num_layers + 1):
            beta = beta_schedule(l, config.lambda_id)
            mask = tape.layers[l - 1].mask
            h_in = h if mask is None else h * mask
            z = (1.0 - config.alpha) * spmm(p, h_in) + config.alpha * x0
            h = elementwise_activation(
                z @ _identity_mapped(params.layer_weights[l - 1], beta), "relu"
            )
    elif config.variant in ("hgnn", "mlp"):
        for l in range(config.num_layers):
            mask = tape.layers[l].mask
            h_in = h if mask is None else h * mask
            z = spmm(p, h_in) if config.variant == "hgnn" else h_in
            h = elementwise_activation(z @ params.layer_weights[l], "relu")
    elif config.variant == "shgcn":
        for _ in range(config.num_layers):
            h = spmm(p, h)

    h_final = h if tape.final_mask is None else h * tape.final_mask
    return h_final @ params.theta_out


def cross_entropy_masked(logits: np.ndarray, labels: np.ndarray, mask) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood over masked rows, with its logit gradient.

    Uses a stabilized log-softmax. The gradient is (softmax - onehot) / |mask|
    on masked rows and zero elsewhere.
    """
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("mask must be non-empty")
    labels = np.asarray(labels, dtype=np.int64)
    rows = logits[mask]
    shifted = rows - np.max(rows, axis=1, keepdims=True)
    log_z = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    log_probs = shifted - log_z
    picked = log_probs[np.arange(mask.size), labels[mask]]
    loss = float(-np.mean(picked))

    grad_rows = np.exp(log_probs)
    grad_rows[np.arange(mask.size), labels[mask]] -= 1.0
    grad_rows /= mask.size
    grad = np.zeros_like(logits)
    grad[mask] = grad_rows.astype(logits.dtype)
    return loss, grad


def model_backward(
    tape: ForwardTape,
    grad_logits: np.ndarray,
    params: ModelParams,
    config: ModelConfig,
    p: Optional[sp.csr_array] = None,
) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradients for every parameter tensor.

    Includes the identity-mapping reparameterization (hidden-layer gradients
    pick up their layer's beta factor) and the L2 weight-decay term on all
    tensors. ``p`` must be the same propagation operator the forward used.
    """
    if grad_logits.shape != tape.logits.shape:
        raise ValueError(
            f"stale tape: upstream gradient {grad_logits.shape} does not match "
            f"logits {tape.logits.shape}"
        )
    grads: dict[str, np.ndarray] = {}

    grads["theta_out"] = tape.h_final_dropped.T @ grad_logits
    g_h = grad_logits @ params.theta_out.T
    if tape.final_mask is not None:
        g_h = g_h * tape.final_mask

    g_x0 = np.zeros_like(tape.x0)
    variant = tape.variant
    if variant == "deep-hgcn":
        for l in range(config.num_layers, 0, -1):
            rec = tape.layers[l - 1]
            beta = beta_schedule(l, config.lambda_id)
            theta_i = _identity_mapped(params.layer_weights[l - 1], beta)
            g_a = g_h * activation_derivative(rec.a, "relu")
            grads[f"layer_{l - 1}"] = beta * (rec.z.T @ g_a)
            g_z = g_a @ theta_i.T
            g_x0 += config.alpha * g_z
            g_h = (1.0 - config.alpha) * spmm(p, g_z)
            if rec.mask is not None:
                g_h = g_h * rec.mask
        g_x0 += g_h
    elif variant in ("hgnn", "mlp"):
        for l in range(config.num_layers, 0, -1):
            rec = tape.layers[l - 1]
            g_a = g_h * activation_derivative(rec.a, "relu")
            grads[f"layer_{l - 1}"] = rec.z.T @ g_a
            g_z = g_a @ params.layer_weights[l - 1].T
            g_h = spmm(p, g_z) if variant == "hgnn" else g_z
            if rec.mask is not None:
                g_h = g_h * rec.mask
        g_x0 += g_h
    elif variant == "shgcn":
        for _ in range(config.num_layers):
            g_h = spmm(p, g_h)
        g_x0 += g_h

    g_a0 = g_x0 * activation_derivative(tape.a0, "relu")
    grads["theta_in"] = tape.x_dropped.T @ g_a0

    if config.weight_decay != 0.0:
        for name, tensor in params.tensors():
            grads[name] = grads[name] + config.weight_decay * tensor
    return grads


@dataclass
class AdamState:
    """First/second moment accumulators and step counter for Adam."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(
            m={name: np.zeros_like(t) for name, t in params.tensors()},
            v={name: np.zeros_like(t) for name, t in params.tensors()},
        )


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> None:
    """Standard bias-corrected Adam update, applied in place."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, tensor in params.tensors():
        g = grads[name]
        if g.shape != tensor.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        tensor -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


def init_params(
    config: ModelConfig,
    feature_dim: int,
    num_classes: int,
    rng: Rng,
) -> ModelParams:
    """Uniform Glorot initialization, deterministic per rng stream.

    The ``shgcn`` variant collapses all hidden weights into the output
    transform, so its hidden-layer list is empty.
    """
    if feature_dim < 1 or num_classes < 1:
        raise ValueError("feature_dim and num_classes must be positive")
    dtype = config.dtype

    def glorot(fan_in, fan_out):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, (fan_in, fan_out)).astype(dtype)

    c = config.hidden_dim
    theta_in = glorot(feature_dim, c)
    if config.variant == "shgcn":
        layer_weights = []
    else:
        layer_weights = [glorot(c, c) for _ in range(config.num_layers)]
    theta_out = glorot(c, num_classes)
    return ModelParams(theta_in=theta_in, layer_weights=layer_weights, theta_out=theta_out)


def save_checkpoint(path, params: ModelParams, config: ModelConfig,
                    feature_dim: int, num_classes: int) -> None:
    """Write a versioned binary checkpoint (header + row-major 64-bit tensors)."""
    variant_bytes = config.variant.encode("utf-8")
    header = CHECKPOINT_MAGIC + struct.pack(
        "<I", CHECKPOINT_VERSION
    ) + struct.pack("<I", len(variant_bytes)) + variant_bytes + struct.pack(
        "<IIIII",
        config.num_layers,
        config.hidden_dim,
        feature_dim,
        num_classes,
        len(params.layer_weights),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for _, tensor in params.tensors():
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ModelParams, dict]:
    """Read a checkpoint; returns the parameters and the header fields."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"not a model checkpoint: bad magic {raw[:4]!r}")
    offset = 4
    (version,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (vlen,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    variant = raw[offset:offset + vlen].decode("utf-8")
    offset += vlen
    num_layers, hidden, feature_dim, num_classes, n_layer_tensors = struct.unpack_from(
        "<IIIII", raw, offset
    )
    offset += 20

    def take(rows, cols):
        nonlocal offset
        count = rows * cols
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(rows, cols)
        offset += count * 8
        return arr.copy()

    theta_in = take(feature_dim, hidden)
    layer_weights = [take(hidden, hidden) for _ in range(n_layer_tensors)]
    theta_out = take(hidden, num_classes)
    header = {
        "variant": variant,
        "num_layers": num_layers,
        "hidden_dim": hidden,
        "feature_dim": feature_dim,
        "num_classes": num_classes,
    }
    return ModelParams(theta_in, layer_weights, theta_out), header
