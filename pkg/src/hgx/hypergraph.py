"""Hypergraph construction, validation, and derived operator matrices.

A hypergraph here is a set of nodes ``0..n-1`` plus weighted hyperedges,
each hyperedge a non-empty set of distinct node ids. From the incidence
structure we derive the symmetric propagation operator, the normalized
Laplacian, and the row-stochastic random-walk transition matrix. All
derived matrices are CSR and immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DatasetError

__all__ = [
    "Hypergraph",
    "DegreeVectors",
    "build_hypergraph",
    "degree_vectors",
    "incidence_matrix",
    "propagation_matrix",
    "laplacian",
    "transition_matrix",
    "is_connected",
]


@dataclass(frozen=True)
class Hypergraph:
    """Validated hypergraph: every node covered, all edge weights positive."""

    num_nodes: int
    hyperedges: tuple[tuple[int, ...], ...]
    edge_weights: np.ndarray = field(repr=False)

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)


@dataclass(frozen=True)
class DegreeVectors:
    """Weighted node degrees, hyperedge sizes, and total volume."""

    node_degrees: np.ndarray
    edge_degrees: np.ndarray
    volume: float


def build_hypergraph(
    num_nodes: int,
    hyperedges,
    weights=None,
    ensure_self_edges: bool = False,
) -> Hypergraph:
    """Validate and construct a hypergraph.

    Duplicate node ids within a hyperedge are deduplicated (incidence is
    binary). Omitted weights default to 1. With ``ensure_self_edges``,
    every node not covered by any hyperedge gets a unit-weight singleton
    edge appended before validation; otherwise isolated nodes are an error
    because degree-zero nodes have no normalized propagation entry.
    """
    if num_nodes < 1:
        raise DatasetError(f"num_nodes must be positive, got {num_nodes}")

    edges: list[tuple[int, ...]] = []
    for i, edge in enumerate(hyperedges):
        members = sorted(set(int(v) for v in edge))
        if not members:
            raise DatasetError(f"hyperedge {i} is empty")
        if members[0] < 0 or members[-1] >= num_nodes:
            bad = members[0] if members[0] < 0 else members[-1]
            raise DatasetError(
                f"hyperedge {i} contains node id {bad}, outside 0..{num_nodes - 1}"
            )
        edges.append(tuple(members))

    if weights is None:
        w = np.ones(len(edges))
    else:
        w = np.asarray([float(x) for x in weights], dtype=np.float64)
        if w.shape != (len(edges),):
            raise DatasetError(
                f"got {w.size} edge weights for {len(edges)} hyperedges"
            )
        if not np.all(w > 0.0):
            bad = int(np.argmin(w > 0.0))
            raise DatasetError(f"edge weight {w[bad]} at index {bad} must be positive")

    covered = np.zeros(num_nodes, dtype=bool)
    for edge in edges:
        covered[list(edge)] = True
    if not covered.all():
        isolated = np.flatnonzero(~covered)
        if ensure_self_edges:
            for v in isolated:
                edges.append((int(v),))
            w = np.concatenate([w, np.ones(isolated.size)])
        else:
            shown = ", ".join(str(v) for v in isolated[:10])
            raise DatasetError(
                f"{isolated.size} isolated node(s) with degree zero: {shown}"
            )

    return Hypergraph(num_nodes=num_nodes, hyperedges=tuple(edges), edge_weights=w)


def degree_vectors(g: Hypergraph) -> DegreeVectors:
    """Node degrees d(v) = sum of incident edge weights, edge sizes, volume."""
    d = np.zeros(g.num_nodes)
    delta = np.zeros(g.num_edges)
    for j, edge in enumerate(g.hyperedges):
        delta[j] = len(edge)
        d[list(edge)] += g.edge_weights[j]
    return DegreeVectors(node_degrees=d, edge_degrees=delta, volume=float(d.sum()))


def incidence_matrix(g: Hypergraph) -> sp.csr_array:
    """Binary node-by-edge incidence matrix in CSR form."""
    rows, cols = [], []
    for j, edge in enumerate(g.hyperedges):
        rows.extend(edge)
        cols.extend([j] * len(edge))
    h = sp.csr_array(
        (np.ones(len(rows)), (rows, cols)), shape=(g.num_nodes, g.num_edges)
    )
    h.sort_indices()
    return h


def _edge_normalized_adjacency(g: Hypergraph) -> sp.csr_array:
    """H W D_e^{-1} H^T, built so the result is bitwise symmetric."""
    deg = degree_vectors(g)
    h = incidence_matrix(g)
    scale = sp.dia_array(
        (g.edge_weights / deg.edge_degrees, [0]), shape=(g.num_edges, g.num_edges)
    )
    c = (h @ scale @ h.T).tocsr()
    c.sum_duplicates()
    c.sort_indices()
    return c


def propagation_matrix(g: Hypergraph) -> sp.csr_array:
    """Symmetric PSD smoothing operator D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2}.

    One application is one step of hypergraph Laplacian smoothing; the
    spectrum lies in [0, 1] with 1 attained on each connected component.
    """
    deg = degree_vectors(g)
    c = _edge_normalized_adjacency(g)
    inv_sqrt = 1.0 / np.sqrt(deg.node_degrees)
    coo = c.tocoo()
    # s_i * s_j commutes exactly, so P inherits C's bitwise symmetry.
    data = coo.data * (inv_sqrt[coo.row] * inv_sqrt[coo.col])
    p = sp.csr_array((data, (coo.row, coo.col)), shape=c.shape)
    p.sort_indices()
    return p


def laplacian(g: Hypergraph) -> sp.csr_array:
    """Normalized hypergraph Laplacian: identity minus the propagation matrix."""
    p = propagation_matrix(g)
    delta = (sp.identity(g.num_nodes, format="csr") - p).tocsr()
    delta.sort_indices()
    return sp.csr_array(delta)


def transition_matrix(g: Hypergraph) -> sp.csr_array:
    """Row-stochastic random-walk operator D_v^{-1} H W D_e^{-1} H^T."""
    deg = degree_vectors(g)
    c = _edge_normalized_adjacency(g)
    coo = c.tocoo()
    data = coo.data / deg.node_degrees[coo.row]
    t = sp.csr_array((data, (coo.row, coo.col)), shape=c.shape)
    t.sort_indices()
    return t


def is_connected(g: Hypergraph) -> bool:
    """True iff the bipartite node-hyperedge graph has one component covering all nodes."""
    if g.num_nodes == 1:
        return True
    node_edges: list[list[int]] = [[] for _ in range(g.num_nodes)]
    for j, edge in enumerate(g.hyperedges):
        for v in edge:
            node_edges[v].append(j)

    seen_nodes = np.zeros(g.num_nodes, dtype=bool)
    seen_edges = np.zeros(g.num_edges, dtype=bool)
    stack = [0]
    seen_nodes[0] = True
    while stack:
        v = stack.pop()
        for j in node_edges[v]:
            if seen_edges[j]:
                continue
            seen_edges[j] = True
            for u in g.hyperedges[j]:
                if not seen_nodes[u]:
                    seen_nodes[u] = True
                    stack.append(u)
    return bool(seen_nodes.all())
