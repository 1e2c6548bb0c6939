"""Measure the coalescence walk's drift and compare it to its lower bound.

During coalescence the number of singleton lists X_t performs a random
walk with positive drift whenever k > 3 * max_degree; the mean increment
from position x is at least ((n - x) / n) * (1 - 2D / (k - D)).  This
script bins observed increments by x and prints them against the bound;
with matplotlib available it also saves a figure.
"""

import os

from perfectcolor import max_degree
from perfectcolor.oracle import coalescence_stats, drift_lower_bound, random_bounded_degree_graph

JOBS = min(2, os.cpu_count() or 1)

g = random_bounded_degree_graph(50, 5, seed=2024)
k = 16
d = max_degree(g)
print(f"instance: n={g.n}, |E|={g.m}, max degree {d}, k={k}")

stats = coalescence_stats(g, k, trials=200, seed=7, jobs=JOBS)
print(f"single-block coalescence rate: {stats.phi_rate:.3f} (guarantee: >= 0.5)")
print(f"mean blocks per full run:      {stats.mean_blocks:.3f} (expected <= 2)\n")

print(f"{'x':>4s} {'obs':>6s} {'mean dX':>9s} {'stderr':>8s} {'bound':>8s}")
rows = []
for x, entry in sorted(stats.drift_profile.items()):
    if entry.count < 50:
        continue
    bound = drift_lower_bound(g.n, k, d, x)
    rows.append((x, entry, bound))
    print(f"{x:4d} {entry.count:6d} {entry.mean:9.4f} {entry.stderr:8.4f} {bound:8.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(xs, [r[1].mean for r in rows], yerr=[3 * r[1].stderr for r in rows],
                fmt="o", ms=3, label="observed mean increment (3 stderr)")
    ax.plot(xs, [r[2] for r in rows], "r--", label="analytic lower bound")
    ax.set_xlabel("singleton count x")
    ax.set_ylabel("mean increment of x")
    ax.legend()
    fig.tight_layout()
    out = os.path.join(os.path.dirname(__file__) or ".", "drift_profile.png")
    fig.savefig(out, dpi=120)
    print(f"\nfigure saved to {out}")
except ImportError:
    print("\nmatplotlib not available; skipped the figure")
