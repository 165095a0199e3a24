"""Build a small hypergraph and inspect its derived operators.

The running example is a 5-node hypergraph with three overlapping
hyperedges. We derive the degree structure, the symmetric propagation
operator P, the normalized Laplacian, and the random-walk transition
matrix, and confirm the basic structural facts about them.
"""

import numpy as np

from hgx import (
    build_hypergraph,
    degree_vectors,
    laplacian,
    propagation_matrix,
    transition_matrix,
)

np.set_printoptions(precision=4, suppress=True)

g = build_hypergraph(5, [[0, 1, 2], [1, 2, 3], [3, 4]], weights=[1.0, 2.0, 1.0])
deg = degree_vectors(g)
print("hyperedges:", g.hyperedges)
print("node degrees d(v):", deg.node_degrees)
print("edge sizes delta(e):", deg.edge_degrees)
print("volume (sum of degrees):", deg.volume)

p = propagation_matrix(g)
print("\npropagation matrix P = Dv^-1/2 H W De^-1 H^T Dv^-1/2:")
print(p.toarray())
print("max |P - P^T| =", np.max(np.abs(p.toarray() - p.toarray().T)))

eigs = np.linalg.eigvalsh(p.toarray())
print("eigenvalues of P (always inside [0, 1]):", eigs)

delta = laplacian(g)
print("\nLaplacian spectrum (1 - spectrum of P):", np.linalg.eigvalsh(delta.toarray()))
null_direction = np.sqrt(deg.node_degrees)
print("Delta @ sqrt(d) (the null direction):", delta @ null_direction)

t = transition_matrix(g)
print("\ntransition matrix row sums:", t.toarray().sum(axis=1))
print("T equals Dv^-1/2 P Dv^1/2 (similarity):",
      np.allclose(t.toarray(),
                  p.toarray() / null_direction[:, None] * null_direction[None, :]))
