"""Watch repeated smoothing collapse features onto the stationary pattern.

Every application of P averages features over hyperedge neighborhoods.
On a connected hypergraph the iterates converge to a rank-one limit
determined solely by degrees and per-column feature mass, wiping out all
per-node signal. That collapse is what breaks deep linear propagation.
"""

import numpy as np

from hgx import (
    Rng,
    build_hypergraph,
    power_smooth,
    propagation_matrix,
    smoothing_limit,
    stationary_propagation,
    stationary_transition,
    transition_matrix,
)
from hgx.verify import random_connected_hypergraph

np.set_printoptions(precision=5, suppress=True)

g = random_connected_hypergraph(Rng(3).stream("demo"), min_nodes=12, max_nodes=12)
p = propagation_matrix(g)

pi = stationary_transition(g)
pi_sym = stationary_propagation(g)
print("stationary distribution of the walk (sums to 1):", pi.sum())
print("left fixed point of P: ||pi_sym P - pi_sym||_inf =",
      np.max(np.abs(pi_sym @ p.toarray() - pi_sym)))

x = Rng(4).stream("features").normal(size=(g.num_nodes, 3))
limit = smoothing_limit(g, x)
print("\ndistance of P^l X from the closed-form limit:")
for steps in (0, 1, 5, 20, 100, 500):
    smoothed = power_smooth(p, x, steps)
    print(f"  l = {steps:3d}: {np.max(np.abs(smoothed - limit)):.3e}")

print("\nlimit rows are all proportional to sqrt(node degree):")
print(limit[:4])

chain = build_hypergraph(3, [[0, 1], [1, 2]])
print("\n3-node chain sanity: stationary walk distribution",
      stationary_transition(chain), "with transition matrix")
print(transition_matrix(chain).toarray())
