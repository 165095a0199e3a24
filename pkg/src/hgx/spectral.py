"""Spectral analysis of hypergraph smoothing: stationary limits, Dirichlet
energy in both its trace and edge-sum forms, layerwise energy-contraction
bounds, and polynomial filters over the normalized Laplacian.

These functions double as numerical oracles: each analytic claim about the
smoothing operator (fixed points, convergence to the stationary pattern,
per-layer energy bounds, filter expressiveness) is computable here by two
independent routes so one can check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import DatasetError
from .hypergraph import (
    Hypergraph,
    degree_vectors,
    is_connected,
    laplacian,
    propagation_matrix,
)
from .linalg import elementwise_activation, max_singular_value, spmm, symmetric_eigen

__all__ = [
    "PolynomialFilter",
    "EnergyTrace",
    "stationary_transition",
    "stationary_propagation",
    "smoothing_limit",
    "power_smooth",
    "dirichlet_energy",
    "dirichlet_energy_sum",
    "min_nonzero_eigenvalue",
    "energy_contraction_check",
    "apply_polynomial_filter",
    "filter_gains",
    "apply_gain_recursion",
]


@dataclass(frozen=True)
class PolynomialFilter:
    """Coefficients c of the operator sum_k c[k] * Delta^k."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise ValueError("a polynomial filter needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("filter coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1


@dataclass
class EnergyTrace:
    """Per-layer Dirichlet energies, optionally with distance-to-stationary."""

    layers: list[int]
    energies: list[float]
    distances: Optional[list[float]] = field(default=None)

    def __post_init__(self):
        if len(self.layers) != len(self.energies):
            raise ValueError("layer and energy series must have equal length")
        if self.distances is not None and len(self.distances) != len(self.layers):
            raise ValueError("distance series length must match layer series")
        if any(e < -1e-10 for e in self.energies):
            raise ValueError("Dirichlet energies must be nonnegative (>= -1e-10)")

    def to_csv(self) -> str:
        lines = ["layer,dirichlet_energy,distance_to_stationary"]
        for i, l in enumerate(self.layers):
            dist = "" if self.distances is None else repr(self.distances[i])
            lines.append(f"{l},{self.energies[i]!r},{dist}")
        return "\n".join(lines) + "\n"


def _require_connected(g: Hypergraph, what: str) -> None:
    if not is_connected(g):
        raise DatasetError(
            f"{what} requires a connected hypergraph (stationary pattern is not unique)"
        )


def stationary_transition(g: Hypergraph) -> np.ndarray:
    """Stationary probability vector of the natural random walk: d(v) / volume."""
    _require_connected(g, "stationary distribution")
    deg = degree_vectors(g)
    return deg.node_degrees / deg.volume


def stationary_propagation(g: Hypergraph) -> np.ndarray:
    """Left fixed point of the symmetric smoothing operator: sqrt(d(v)) / volume."""
    _require_connected(g, "stationary distribution")
    deg = degree_vectors(g)
    return np.sqrt(deg.node_degrees) / deg.volume


def smoothing_limit(g: Hypergraph, x: np.ndarray) -> np.ndarray:
    """Limit of repeated smoothing, lim P^l X.

    Every column collapses onto the stationary direction from
    `stationary_propagation`: column j of the limit is
    ``(sum_i sqrt(d_i) * x_ij) * pi``, i.e. the column's mass measured
    against the square-rooted degrees times the fixed-point vector. The
    result retains only that mass and the degree pattern, which is the
    mechanism behind over-smoothing.
    """
    _require_connected(g, "smoothing limit")
    pi = stationary_propagation(g)
    sqrt_deg = np.sqrt(degree_vectors(g).node_degrees)
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.shape[0] != g.num_nodes:
        raise ValueError(
            f"feature rows ({x.shape[0]}) must match node count ({g.num_nodes})"
        )
    limit = np.outer(pi, sqrt_deg @ x)
    return limit[:, 0] if squeeze else limit


def power_smooth(p: sp.csr_array, x: np.ndarray, steps: int) -> np.ndarray:
    """Apply the smoothing operator ``steps`` times by repeated products."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    out = np.asarray(x, dtype=np.float64).copy()
    for _ in range(steps):
        out = spmm(p, out)
    return out


def dirichlet_energy(delta: sp.csr_array, x: np.ndarray) -> float:
    """Trace-form Dirichlet energy tr(X^T Delta X) of node features X."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if delta.shape[1] != x.shape[0]:
        raise ValueError(
            f"dimension mismatch: Laplacian is {delta.shape}, features have {x.shape[0]} rows"
        )
    return float(np.sum(x * spmm(delta, x)))


def dirichlet_energy_sum(g: Hypergraph, x: np.ndarray) -> float:
    """Edge-sum form of the Dirichlet energy, summed over feature columns.

    For each hyperedge e and each ordered node pair (u, v) in e, accumulates
    w(e)/delta(e) * (x_u/sqrt(d_u) - x_v/sqrt(d_v))^2 / 2. Agreement with
    the trace form is the cross-check this second route exists for.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    deg = degree_vectors(g)
    scaled = x / np.sqrt(deg.node_degrees)[:, None]
    total = 0.0
    for j, edge in enumerate(g.hyperedges):
        members = list(edge)
        rows = scaled[members]
        coeff = g.edge_weights[j] / deg.edge_degrees[j]
        # Over ordered pairs: sum (r_u - r_v)^2 = 2k * sum r^2 - 2 * (sum r)^2.
        k = len(members)
        sq = float(np.sum(rows * rows))
        colsum = rows.sum(axis=0)
        pair_sum = 2.0 * k * sq - 2.0 * float(np.dot(colsum, colsum))
        total += 0.5 * coeff * pair_sum
    return total


def min_nonzero_eigenvalue(delta: sp.csr_array, threshold: float = 1e-8) -> float:
    """Smallest Laplacian eigenvalue above ``threshold``.

    Raises ``ValueError`` when every eigenvalue sits below the threshold
    (a single-node hypergraph, for instance, has only the zero eigenvalue).
    """
    dense = delta.toarray()
    eigenvalues, _ = symmetric_eigen(dense)
    above = eigenvalues[eigenvalues > threshold]
    if above.size == 0:
        raise ValueError(
            f"no eigenvalue above {threshold}: spectrum is numerically all-zero"
        )
    return float(above[0])


def energy_contraction_check(
    g: Hypergraph,
    x: np.ndarray,
    theta_list,
    slack: float = 1e-9,
):
    """Simulate sigma(P X Theta) layers and compare energies to their bound.

    For each layer l the bound is s_l * (1 - lam)^2 * E(X^(l-1)) with
    s_l the running product of squared max singular values of the layer
    weights and lam the smallest nonzero Laplacian eigenvalue. Returns a
    list of rows ``(layer, measured, bound, violated)`` where ``violated``
    flags measured > bound beyond ``slack`` relative tolerance.
    """
    p = propagation_matrix(g)
    delta = laplacian(g)
    lam = min_nonzero_eigenvalue(delta)
    shrink = (1.0 - lam) ** 2

    current = np.asarray(x, dtype=np.float64)
    if current.ndim == 1:
        current = current[:, None]
    energy = dirichlet_energy(delta, current)
    rows = []
    s_running = 1.0
    for l, theta in enumerate(theta_list, start=1):
        theta = np.asarray(theta, dtype=np.float64)
        s_running *= max_singular_value(theta) ** 2
        previous_energy = energy
        current = elementwise_activation(spmm(p, current) @ theta, "relu")
        energy = dirichlet_energy(delta, current)
        bound = s_running * shrink * previous_energy
        violated = energy > bound + slack * max(abs(bound), 1.0)
        rows.append((l, energy, bound, bool(violated)))
    return rows


def apply_polynomial_filter(
    f: PolynomialFilter, delta: sp.csr_array, x: np.ndarray
) -> np.ndarray:
    """Evaluate (sum_k c[k] Delta^k) x by Horner's rule in Delta."""
    x = np.asarray(x, dtype=np.float64)
    coeffs = f.coefficients
    out = coeffs[-1] * x
    for c in reversed(coeffs[:-1]):
        out = spmm(delta, out) + c * x
    return out


def _signed_binomial_transform(values: np.ndarray) -> np.ndarray:
    """Self-inverse map b[l] = (-1)^l * sum_{k>=l} binom(k, l) * values[k]."""
    n = values.size
    out = np.zeros(n)
    for l in range(n):
        acc = 0.0
        for k in range(l, n):
            acc += math.comb(k, l) * values[k]
        out[l] = ((-1) ** l) * acc
    return out


def filter_gains(f: PolynomialFilter) -> list[float]:
    """Per-layer scalar gains through which the residual smoothing recursion
    reproduces the polynomial filter.

    With K coefficients, returns K gains g[0..K-1] such that
    `apply_gain_recursion(gains, p, x)` equals `apply_polynomial_filter(f,
    delta, x)` for p = I - delta. The gains come from consecutive ratios of
    the filter's coefficients re-expressed in powers of p: the cumulative
    products prod_{k=K-l-1}^{K-1} g[k] must equal those re-expressed
    coefficients. Zero intermediate products are handled by solving the
    product system directly; if the system is inconsistent (a zero product
    followed by a nonzero one) no exact gain sequence exists and a
    ``ValueError`` is raised.
    """
    theta = np.asarray(f.coefficients, dtype=np.float64)
    k_layers = theta.size
    products = _signed_binomial_transform(theta)

    # gains[K-1-l] = products[l] / products[l-1]; walk from the tail gain.
    # Each product extends the previous one by one factor, so a zero product
    # can only be followed by zeros; anything else has no solution.
    gains = np.zeros(k_layers)
    gains[k_layers - 1] = products[0]
    for l in range(1, k_layers):
        if products[l - 1] == 0.0:
            if products[l] != 0.0:
                raise ValueError(
                    "degenerate filter: a zero cumulative product precedes a "
                    f"nonzero one (position {l}), no exact gain sequence exists"
                )
            gains[k_layers - 1 - l] = 0.0
        else:
            gains[k_layers - 1 - l] = products[l] / products[l - 1]
    return [float(v) for v in gains]


def apply_gain_recursion(gains, p: sp.csr_array, x: np.ndarray) -> np.ndarray:
    """Evaluate the gain-scaled residual smoothing recursion.

    Runs z <- gains[j] * (x + P z) for j = 0..K-1 starting from z = 0, the
    constant-identity-weight form of the residual convolution stack. The
    result is the polynomial sum_l (gains[K-1-l] * ... * gains[K-1]) P^l x.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.zeros_like(x)
    for gain in gains:
        z = gain * (x + spmm(p, z))
    return z
