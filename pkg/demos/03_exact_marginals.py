"""The exact-marginal oracle: zero-tolerance checks of the update law.

A single bounded-list update must recolor its vertex exactly uniformly
over the colors unused by the neighbors, for every coloring compatible
with the current bounding lists.  The oracle integrates the update's
randomness analytically with rational arithmetic, so the check is exact,
not statistical.
"""

from perfectcolor import Graph
from perfectcolor.kernel import CONTRACT, BoundingState
from perfectcolor.oracle import ExactDistribution, exact_update_marginal, scripted_trace_check

# A hand-built scene: star center about to contract, k = 10.
g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
state = BoundingState(4, 10)
state.set_mask(1, 0b0000000011)  # L = {1, 2}
state.set_mask(2, 0b0000001100)  # L = {3, 4}
state.set_mask(3, 0b0000010000)  # L = {5}

chi = (7, 1, 3, 5)  # a proper coloring compatible with those lists
dist = exact_update_marginal(state, g, 0, chi, CONTRACT)
print("law of the center's new color, exact rationals:")
for color, p in sorted(dist.mass.items()):
    print(f"  color {color}: {p}")

expected = ExactDistribution.uniform(set(range(1, 11)) - {1, 3, 5})
print(f"equals uniform over colors unused by neighbors: {dist == expected}")

# The same check swept over a scripted 50-update trace, covering every
# compatible proper coloring at every step.
report = scripted_trace_check(g, 10, seed=99, updates=50)
print(f"\nscripted trace: {report.updates_checked} updates, "
      f"{report.triples_checked} (state, vertex, coloring) triples, "
      f"all exactly uniform: {report.ok}")
