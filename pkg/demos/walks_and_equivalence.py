"""Random walks with edge-dependent vertex weights and when they reduce to graphs.

Run with ``python3 demos/walks_and_equivalence.py``.
"""

import numpy as np

from hgx import (
    check_equivalence_conditions,
    clique_graph,
    clique_walk_matrix,
    is_reversible,
    stationary_distribution,
    transition_matrix,
)
from hgx import fixtures as F

np.set_printoptions(precision=4, suppress=True)

# A small hypergraph whose vertex weights differ from edge to edge (Q1 = 2 Q2).
h = F.r5()
print("incidence weights Q2:\n", h.Q2.toarray())

P = transition_matrix(h)
print("\nlazy walk P:\n", P.toarray())

rep = check_equivalence_conditions(h)
print("\nconditions:", rep.to_dict())

# Because Q1 is proportional to Q2 the walk is a walk on a weighted clique graph.
g = clique_graph(h)
diff = np.abs(clique_walk_matrix(g).toarray() - P.toarray()).max()
print(f"clique graph source={g.source}, max |P - P_clique| = {diff:.2e}")

st = stationary_distribution(h)
print("stationary distribution", st.method, st.pi)

# When Q1 and Q2 are unrelated the walk can be irreversible.
T = F.cx4_transition()
pi = stationary_distribution(T, mode="power").pi
r = is_reversible(T, pi)
u, v, gap = r.worst_violation
print(f"\nirreversible 4-state chain: pi = {pi}")
print(f"pair ({u + 1},{v + 1}): pi(u)P(u,v) = {r.forward:.6f} vs pi(v)P(v,u) = {r.backward:.6f}")
