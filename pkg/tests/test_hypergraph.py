import numpy as np
import pytest

from hgx.errors import DatasetError
from hgx.hypergraph import (
    build_hypergraph,
    degree_vectors,
    incidence_matrix,
    is_connected,
    laplacian,
    propagation_matrix,
    transition_matrix,
)


def brute_force_propagation(g):
    """Dense textbook evaluation of D^-1/2 H W De^-1 H^T D^-1/2."""
    h = incidence_matrix(g).toarray()
    deg = degree_vectors(g)
    dv = np.diag(1.0 / np.sqrt(deg.node_degrees))
    de = np.diag(1.0 / deg.edge_degrees)
    w = np.diag(g.edge_weights)
    return dv @ h @ w @ de @ h.T @ dv


class TestBuild:
    def test_singleton_self_edge(self, singleton):
        deg = degree_vectors(singleton)
        assert deg.node_degrees[0] == 1.0
        assert deg.edge_degrees[0] == 1.0

    def test_chain_degrees(self, chain):
        deg = degree_vectors(chain)
        np.testing.assert_array_equal(deg.node_degrees, [1.0, 2.0, 1.0])
        np.testing.assert_array_equal(deg.edge_degrees, [2.0, 2.0])
        assert deg.volume == 4.0

    def test_default_unit_weights(self, chain):
        np.testing.assert_array_equal(chain.edge_weights, [1.0, 1.0])

    def test_isolated_node_rejected(self):
        with pytest.raises(DatasetError, match="isolated"):
            build_hypergraph(3, [[0, 1]])

    def test_ensure_self_edges(self):
        g = build_hypergraph(3, [[0, 1]], ensure_self_edges=True)
        assert g.hyperedges == ((0, 1), (2,))
        p = propagation_matrix(g).toarray()
        assert p[2, 2] == pytest.approx(1.0)

    def test_out_of_range_node(self):
        with pytest.raises(DatasetError, match="node id 3"):
            build_hypergraph(3, [[0, 3]])
        with pytest.raises(DatasetError, match="node id -1"):
            build_hypergraph(3, [[0, -1], [1, 2]])

    def test_empty_edge(self):
        with pytest.raises(DatasetError, match="empty"):
            build_hypergraph(2, [[0, 1], []])

    def test_nonpositive_weight(self):
        with pytest.raises(DatasetError, match="must be positive"):
            build_hypergraph(2, [[0, 1]], weights=[0.0])
        with pytest.raises(DatasetError, match="must be positive"):
            build_hypergraph(2, [[0, 1]], weights=[-2.0])

    def test_weight_count_mismatch(self):
        with pytest.raises(DatasetError, match="2 edge weights for 1"):
            build_hypergraph(2, [[0, 1]], weights=[1.0, 1.0])

    def test_duplicate_members_deduplicated(self):
        g = build_hypergraph(2, [[0, 1, 1, 0]])
        assert g.hyperedges == ((0, 1),)
        assert degree_vectors(g).edge_degrees[0] == 2.0

    def test_degree_identity(self, graph_factory):
        # sum_v d(v) == sum_e w(e) * delta(e)
        for seed in range(10):
            g = graph_factory(seed)
            deg = degree_vectors(g)
            lhs = deg.node_degrees.sum()
            rhs = float(np.dot(g.edge_weights, deg.edge_degrees))
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestPropagation:
    def test_singleton(self, singleton):
        np.testing.assert_array_equal(propagation_matrix(singleton).toarray(), [[1.0]])

    def test_chain_matches_brute_force(self, chain):
        p = propagation_matrix(chain).toarray()
        np.testing.assert_allclose(p, brute_force_propagation(chain), atol=1e-14)
        expected = np.array(
            [[0.5, 0.35355, 0.0], [0.35355, 0.5, 0.35355], [0.0, 0.35355, 0.5]]
        )
        np.testing.assert_allclose(p, expected, atol=1e-5)

    def test_random_matches_brute_force(self, graph_factory):
        for seed in range(20):
            g = graph_factory(seed)
            p = propagation_matrix(g).toarray()
            assert np.max(np.abs(p - brute_force_propagation(g))) < 1e-13

    def test_symmetry(self, graph_factory):
        for seed in range(20):
            p = propagation_matrix(graph_factory(seed)).toarray()
            assert np.max(np.abs(p - p.T)) < 1e-12

    def test_spectrum_in_unit_interval(self, graph_factory):
        for seed in range(10):
            p = propagation_matrix(graph_factory(seed)).toarray()
            eigs = np.linalg.eigvalsh(p)
            assert eigs[0] > -1e-10
            assert eigs[-1] < 1.0 + 1e-10

    def test_large_spectrum_and_null_direction(self, graph_factory):
        # n around 200: zero Laplacian eigenvalue with eigenvector along sqrt(d)
        g = graph_factory(99, min_nodes=190, max_nodes=200)
        delta = laplacian(g).toarray()
        eigs, vecs = np.linalg.eigh(delta)
        assert eigs[0] == pytest.approx(0.0, abs=1e-10)
        assert eigs[-1] < 1.0 + 1e-10
        direction = np.sqrt(degree_vectors(g).node_degrees)
        direction /= np.linalg.norm(direction)
        v = vecs[:, 0]
        if v @ direction < 0:
            v = -v
        assert np.max(np.abs(v - direction)) < 1e-8


class TestLaplacian:
    def test_singleton(self, singleton):
        np.testing.assert_array_equal(laplacian(singleton).toarray(), [[0.0]])

    def test_is_identity_minus_propagation(self, chain):
        delta = laplacian(chain).toarray()
        p = propagation_matrix(chain).toarray()
        np.testing.assert_allclose(delta, np.eye(3) - p, atol=1e-15)

    def test_annihilates_sqrt_degree(self, graph_factory):
        for seed in range(10):
            g = graph_factory(seed)
            delta = laplacian(g)
            null_vec = np.sqrt(degree_vectors(g).node_degrees)
            assert np.max(np.abs(delta @ null_vec)) < 1e-10


class TestTransition:
    def test_singleton(self, singleton):
        np.testing.assert_array_equal(transition_matrix(singleton).toarray(), [[1.0]])

    def test_rows_stochastic(self, chain, graph_factory):
        for g in [chain] + [graph_factory(s) for s in range(10)]:
            rows = transition_matrix(g).toarray().sum(axis=1)
            assert np.max(np.abs(rows - 1.0)) < 1e-12

    def test_similarity_to_propagation(self, chain, graph_factory):
        # T == D^-1/2 P D^1/2 elementwise
        for g in [chain] + [graph_factory(s) for s in range(10)]:
            d = degree_vectors(g).node_degrees
            p = propagation_matrix(g).toarray()
            t = transition_matrix(g).toarray()
            similar = (p / np.sqrt(d)[:, None]) * np.sqrt(d)[None, :]
            assert np.max(np.abs(t - similar)) < 1e-12


def union_find_components(g):
    parent = list(range(g.num_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for edge in g.hyperedges:
        for v in edge[1:]:
            ra, rb = find(edge[0]), find(v)
            if ra != rb:
                parent[rb] = ra
    return len({find(v) for v in range(g.num_nodes)})


class TestConnectivity:
    def test_chain_connected(self, chain):
        assert is_connected(chain)

    def test_two_components(self):
        g = build_hypergraph(4, [[0, 1], [2, 3]])
        assert not is_connected(g)

    def test_singleton_connected(self, singleton):
        assert is_connected(singleton)

    def test_matches_union_find(self, np_rng):
        for _ in range(30):
            n = int(np_rng.integers(2, 15))
            m = int(np_rng.integers(1, 8))
            edges = []
            for _ in range(m):
                size = int(np_rng.integers(2, min(5, n) + 1))
                edges.append(np_rng.choice(n, size=size, replace=False).tolist())
            g = build_hypergraph(n, edges, ensure_self_edges=True)
            assert is_connected(g) == (union_find_components(g) == 1)
