"""Watch the bounding chain collapse and coalesce inside one block.

Every vertex starts with the full color list [k].  The collapse phase
(|E| + n compress/contract updates) brings each list down to at most two
colors; the coalescence phase then contracts random vertices until, with
probability at least 1/2 per block, every list is a singleton.  At that
point the block's update composition is a constant function: applied to
any proper coloring it lands on the same output.
"""

from collections import Counter

from perfectcolor import Graph, enumerate_colorings
from perfectcolor.phases import generate_block, phase_plan
from perfectcolor.sampler import apply_block

g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])
k = 7
plan = phase_plan(g, k)
print(f"block plan: {plan.collapse_steps} collapse steps, "
      f"then {plan.t_prime} coalescence steps (T = {plan.total})")


class ListSizeWatcher:
    """Prints the list-size histogram at a few interesting moments."""

    def __init__(self, collapse_steps):
        self.collapse_steps = collapse_steps
        self.marks = set()

    def pre_update(self, step, kind, vertex, spruce_set, state):
        pass

    def post_update(self, step, kind, vertex, state):
        last_collapse = step == self.collapse_steps - 1
        periodic = step % 20 == 0
        if (periodic or last_collapse) and step not in self.marks:
            self.marks.add(step)
            hist = dict(sorted(Counter(state.sizes).items()))
            phase = "collapse" if step < self.collapse_steps else "coalesce"
            print(f"  step {step:3d} [{phase}] {kind:8s} at v{vertex}: "
                  f"sizes {hist}, singletons {state.nsingle}")


seed = 11
block = generate_block(g, k, seed, 0, keep_tuples=True, observer=ListSizeWatcher(plan.collapse_steps))
print(f"\nphi = {block.phi}")

if block.phi:
    print(f"unique coloring pinned by the block: {block.coloring}")
    # The constant-function property, checked exhaustively: every proper
    # coloring is mapped to the same output.
    images = {apply_block(block, chi, g) for chi in enumerate_colorings(g, k)}
    print(f"images of all {6**5 - 6} proper colorings under the block: "
          f"{len(images)} distinct -> {images.pop()}")
