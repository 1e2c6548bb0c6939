"""Independent oracles for every distributional claim the sampler makes.

The exact-marginal oracle integrates the update randomness analytically
(rational arithmetic, zero tolerance): for a fixed bounding state, vertex,
and compatible proper coloring, the law of the recolored vertex under
generate-then-decode must be exactly uniform on the colors unused by the
neighbors.  The statistical harness complements it with chi-square
goodness-of-fit against brute-force enumerations of all proper colorings,
and with drift/coalescence measurements against their analytic lower
bounds.
"""

from __future__ import annotations

import math
import multiprocessing
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from statistics import NormalDist

import numpy as np

from .graph import Graph, is_proper
from .kernel import COMPRESS, CONTRACT, BoundingState, palette_masks
from .phases import generate_block, phase_plan
from .randomness import derive_trial_seed
from .sampler import perfect_sample

_FULL_RUN_OFFSET = 1 << 40  # trial-seed namespace separation


def chi_square_critical(df: int, alpha: float = 0.001) -> float:
    """Upper critical value of chi-square via the Wilson-Hilferty approximation."""
    z = NormalDist().inv_cdf(1.0 - alpha)
    t = 2.0 / (9.0 * df)
    return df * (1.0 - t + z * math.sqrt(t)) ** 3


def enumerate_colorings(g: Graph, k: int, guard: int = 10**8) -> list[tuple[int, ...]]:
    """All proper k-colorings by backtracking, in lexicographic order.

    Guarded by k**n <= guard; this is the ground-truth support for the
    uniformity tests.
    """
    if k**g.n > guard:
        raise ValueError(f"k^n = {k}^{g.n} exceeds the enumeration guard {guard}")
    earlier = [tuple(w for w in g.adj[v] if w < v) for v in range(g.n)]
    out: list[tuple[int, ...]] = []
    chi = [0] * g.n

    def walk(v: int) -> None:
        if v == g.n:
            out.append(tuple(chi))
            return
        for c in range(1, k + 1):
            if all(chi[w] != c for w in earlier[v]):
                chi[v] = c
                walk(v + 1)
        chi[v] = 0

    walk(0)
    return out


def compatible_proper_colorings(g: Graph, state: BoundingState,
                                guard: int = 10**7) -> list[tuple[int, ...]]:
    """All proper colorings chi with chi(v) in L(v) for every v."""
    size_product = 1
    for sz in state.sizes:
        size_product *= sz
        if size_product > guard:
            raise ValueError(f"list-size product exceeds the guard {guard}")
    candidates = [sorted(state.colors(v)) for v in range(g.n)]
    earlier = [tuple(w for w in g.adj[v] if w < v) for v in range(g.n)]
    out: list[tuple[int, ...]] = []
    chi = [0] * g.n

    def walk(v: int) -> None:
        if v == g.n:
            out.append(tuple(chi))
            return
        for c in candidates[v]:
            if all(chi[w] != c for w in earlier[v]):
                chi[v] = c
                walk(v + 1)
        chi[v] = 0

    walk(0)
    return out


@dataclass(frozen=True)
class ExactDistribution:
    """Probability masses over colors, exact rationals summing to 1."""

    mass: dict[int, Fraction]

    def __post_init__(self):
        total = sum(self.mass.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        if any(p < 0 for p in self.mass.values()):
            raise ValueError("negative mass")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(c for c, p in self.mass.items() if p > 0)

    @classmethod
    def uniform(cls, colors) -> "ExactDistribution":
        colors = list(colors)
        p = Fraction(1, len(colors))
        return cls({c: p for c in colors})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactDistribution):
            return NotImplemented
        keys = set(self.mass) | set(other.mass)
        zero = Fraction(0)
        return all(self.mass.get(c, zero) == other.mass.get(c, zero) for c in keys)


def _mask_colors(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return out


def _first_valid_mass(a_sorted: list[int], invalid: set[int]) -> Fraction:
    """P[first color of a uniform permutation of A outside ``invalid`` = a].

    Uniform over A \\ invalid; computed from scratch rather than assumed.
    Small |A| enumerates all permutations; larger |A| sums over the
    (first-valid color, rank) pairs, keeping the oracle polynomial.
    """
    n_valid = len(a_sorted) - sum(1 for a in a_sorted if a in invalid)
    if n_valid == 0:
        raise ValueError("no valid color in the spruce set")
    da = len(a_sorted)
    if da <= 5:
        tally: dict[int, int] = {}
        for sig in permutations(a_sorted):
            first = next(c for c in sig if c not in invalid)
            tally[first] = tally.get(first, 0) + 1
        masses = {c: Fraction(t, math.factorial(da)) for c, t in tally.items()}
        # all valid colors receive identical mass by symmetry; return it
        values = set(masses.values())
        assert len(values) == 1 and len(masses) == n_valid
        return values.pop()
    m_invalid = da - n_valid
    total = Fraction(0)
    fact_da = math.factorial(da)
    for rank in range(1, m_invalid + 2):
        ways = (math.perm(m_invalid, rank - 1) * math.factorial(da - rank))
        total += Fraction(ways, fact_da)
    return total


def exact_update_marginal(state: BoundingState, g: Graph, v: int, chi,
                          kind: str, spruce_set=None) -> ExactDistribution:
    """Exact law of the new color at v under generate-then-decode.

    Enumerates every draw (c1, c2 or sigma) and integrates tau over the
    exact rational intervals induced by the decode branches.  ``chi`` must
    be proper and compatible with the state's lists.
    """
    k = state.k
    if not is_proper(g, chi):
        raise ValueError("chi is not a proper coloring")
    for w in range(g.n):
        if not (state.masks[w] >> (chi[w] - 1)) & 1:
            raise ValueError(f"chi({w}) = {chi[w]} is outside L({w})")
    chi_n = {chi[w] for w in g.adj[v]}
    m = len(chi_n)
    mass: dict[int, Fraction] = {}

    def add(color: int, p: Fraction) -> None:
        if p:
            mass[color] = mass.get(color, Fraction(0)) + p

    if kind == CONTRACT:
        d = g.max_degree
        s_mask, q_mask = palette_masks(state, g, v)
        s = s_mask.bit_count()
        q = q_mask.bit_count()
        if s >= k - d:
            raise ValueError(f"contract precondition violated: |S|={s} >= k-delta={k - d}")
        complement = _mask_colors(((1 << k) - 1) & ~s_mask)
        sq = _mask_colors(s_mask & ~q_mask)
        w1 = Fraction(1, len(complement))
        if not sq:
            for c1 in complement:
                add(c1, w1)
        else:
            p_l = Fraction(k - d - (s - q), k - d)
            p_chi = Fraction(k - m - (s - q), k - m)
            w2 = Fraction(1, len(sq))
            for c1 in complement:
                for c2 in sq:
                    w = w1 * w2
                    # tau in [0, p_L]: singleton M=(c1); decode returns c1.
                    # tau in (p_L, p_chi]: M=(c1,c2); decode returns c1.
                    add(c1, w * p_chi)
                    # tau in (p_chi, 1]: c2 unless it collides with a neighbor.
                    if c2 in chi_n:
                        add(c1, w * (1 - p_chi))
                    else:
                        add(c2, w * (1 - p_chi))
        return ExactDistribution(mass)

    if kind == COMPRESS:
        if spruce_set is None:
            raise ValueError("compress marginal needs the spruce set A")
        a_sorted = sorted(spruce_set)
        da = len(a_sorted)
        a_set = set(a_sorted)
        complement = [c for c in range(1, k + 1) if c not in a_set]
        w1 = Fraction(1, len(complement))
        # P[tau <= p_chi] with p_chi = 1 - (k-da)/(k-m), clamped to [0,1]
        p_chi = Fraction(da - m, k - m)
        p_le = min(max(p_chi, Fraction(0)), Fraction(1))
        valid = [a for a in a_sorted if a not in chi_n]
        per_valid = _first_valid_mass(a_sorted, chi_n) if valid else None
        for c1 in complement:
            if c1 not in chi_n:
                add(c1, w1 * (1 - p_le))
                sigma_weight = w1 * p_le
            else:
                sigma_weight = w1
            if sigma_weight:
                if per_valid is None:
                    raise ValueError("decode would find no valid color in A")
                for a in valid:
                    add(a, sigma_weight * per_valid)
        return ExactDistribution(mass)

    raise ValueError(f"unknown update kind {kind!r}")


@dataclass
class TraceCheckReport:
    """Result of the scripted-trace exact-marginal sweep."""

    updates_checked: int
    triples_checked: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


class _TraceObserver:
    def __init__(self, g: Graph, k: int, max_updates: int, guard: int):
        self.g = g
        self.k = k
        self.max_updates = max_updates
        self.guard = guard
        self.updates = 0
        self.triples = 0
        self.failures: list[str] = []

    def pre_update(self, step, kind, vertex, spruce_set, state) -> None:
        if self.updates >= self.max_updates:
            return
        self.updates += 1
        chi_list = compatible_proper_colorings(self.g, state, self.guard)
        for chi in chi_list:
            dist = exact_update_marginal(state, self.g, vertex, chi, kind, spruce_set)
            allowed = set(range(1, self.k + 1)) - {chi[w] for w in self.g.adj[vertex]}
            if dist != ExactDistribution.uniform(allowed):
                self.failures.append(
                    f"step {step} ({kind} at {vertex}), chi={chi}: {dict(dist.mass)}"
                )
        self.triples += len(chi_list)

    def post_update(self, step, kind, vertex, state) -> None:
        pass


def scripted_trace_check(g: Graph, k: int, seed: int, updates: int = 50,
                         guard: int = 10**7) -> TraceCheckReport:
    """Exact-marginal sweep over a deterministic scripted update trace.

    Replays the first ``updates`` scheduled updates of blocks 0, 1, ... for
    the given seed; before each update, every proper coloring compatible
    with the live bounding state is checked against the exact marginal.
    """
    obs = _TraceObserver(g, k, updates, guard)
    index = 0
    while obs.updates < updates:
        generate_block(g, k, seed, index, keep_tuples=False, observer=obs)
        index += 1
    return TraceCheckReport(obs.updates, obs.triples, obs.failures)


@dataclass
class UniformityReport:
    """Pearson goodness-of-fit of sampler output against the exact support."""

    n_samples: int
    support_size: int
    chi_square: float
    tv_distance: float
    counts: np.ndarray = field(repr=False)

    @property
    def df(self) -> int:
        return self.support_size - 1


_POOL_CTX: dict = {}


def _uniformity_init(g, k, seed, index):
    _POOL_CTX.update(g=g, k=k, seed=seed, index=index)


def _uniformity_chunk(span):
    g = _POOL_CTX["g"]
    k = _POOL_CTX["k"]
    seed = _POOL_CTX["seed"]
    index = _POOL_CTX["index"]
    counts = np.zeros(len(index), dtype=np.int64)
    lo, hi = span
    for i in range(lo, hi):
        chi, _ = perfect_sample(g, k, derive_trial_seed(seed, i))
        pos = index.get(chi)
        if pos is None:
            raise RuntimeError(f"sample {chi} is outside the enumerated support")
        counts[pos] += 1
    return counts


def _spans(total: int, pieces: int) -> list[tuple[int, int]]:
    size = (total + pieces - 1) // pieces
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def goodness_of_fit(counts) -> tuple[float, float]:
    """Pearson statistic and empirical total-variation distance vs uniform."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    expected = n / counts.size
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    tv = 0.5 * float(np.abs(counts / n - 1.0 / counts.size).sum())
    return chi2, tv


def uniformity_test(g: Graph, k: int, n_samples: int, seed: int,
                    jobs: int = 1) -> UniformityReport:
    """Draw n_samples independent perfect samples and test uniformity.

    Sample i uses the derived trial seed (seed, i), so the tally does not
    depend on ``jobs``; chi-square has support_size - 1 degrees of freedom.
    """
    support = enumerate_colorings(g, k)
    index = {c: i for i, c in enumerate(support)}
    if jobs <= 1:
        counts = _uniformity_chunk_seq(g, k, seed, index, n_samples)
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(jobs, initializer=_uniformity_init,
                      initargs=(g, k, seed, index)) as pool:
            parts = pool.map(_uniformity_chunk, _spans(n_samples, jobs * 4))
        counts = np.sum(parts, axis=0)
    chi2, tv = goodness_of_fit(counts)
    return UniformityReport(n_samples, len(support), chi2, tv, counts)


def _uniformity_chunk_seq(g, k, seed, index, n_samples):
    _uniformity_init(g, k, seed, index)
    return _uniformity_chunk((0, n_samples))


@dataclass(frozen=True)
class DriftBin:
    """Mean singleton-count increment observed from one walk position."""

    count: int
    mean: float
    stderr: float


def drift_lower_bound(n: int, k: int, delta: int, x: int) -> float:
    """Analytic lower bound on the drift at singleton count x."""
    return ((n - x) / n) * (1.0 - 2.0 * delta / (k - delta))


class DriftRecorder:
    """Observer accumulating per-step increments of the singleton count."""

    def __init__(self, collapse_steps: int):
        self.collapse_steps = collapse_steps
        self.bins: dict[int, list[int]] = {}
        self._x = 0

    def pre_update(self, step, kind, vertex, spruce_set, state) -> None:
        if step >= self.collapse_steps:
            self._x = state.nsingle

    def post_update(self, step, kind, vertex, state) -> None:
        if step >= self.collapse_steps:
            dx = state.nsingle - self._x
            entry = self.bins.get(self._x)
            if entry is None:
                self.bins[self._x] = [1, dx, dx * dx]
            else:
                entry[0] += 1
                entry[1] += dx
                entry[2] += dx * dx


def _merge_bins(target: dict, source: dict) -> None:
    for x, (cnt, total, sq) in source.items():
        entry = target.get(x)
        if entry is None:
            target[x] = [cnt, total, sq]
        else:
            entry[0] += cnt
            entry[1] += total
            entry[2] += sq


@dataclass
class CoalescenceReport:
    """Single-block phi rate, full-run block counts, and the drift profile."""

    trials: int
    phi_rate: float
    mean_blocks: float
    blocks_used: list[int] = field(repr=False)
    drift_profile: dict[int, DriftBin] = field(repr=False, default_factory=dict)


def _stats_init(g, k, seed, collapse_steps, with_drift):
    _POOL_CTX.update(g=g, k=k, seed=seed, collapse_steps=collapse_steps,
                     with_drift=with_drift)


def _phi_chunk(span):
    g = _POOL_CTX["g"]
    k = _POOL_CTX["k"]
    seed = _POOL_CTX["seed"]
    with_drift = _POOL_CTX["with_drift"]
    collapse_steps = _POOL_CTX["collapse_steps"]
    phis = 0
    bins: dict[int, list[int]] = {}
    lo, hi = span
    for t in range(lo, hi):
        rec = DriftRecorder(collapse_steps) if with_drift else None
        blk = generate_block(g, k, derive_trial_seed(seed, t), 0,
                             keep_tuples=False, observer=rec)
        phis += blk.phi
        if rec is not None:
            _merge_bins(bins, rec.bins)
    return phis, bins


def _runs_chunk(span):
    g = _POOL_CTX["g"]
    k = _POOL_CTX["k"]
    seed = _POOL_CTX["seed"]
    lo, hi = span
    return [perfect_sample(g, k, derive_trial_seed(seed, _FULL_RUN_OFFSET + t))[1]
            for t in range(lo, hi)]


def coalescence_stats(g: Graph, k: int, trials: int, seed: int, jobs: int = 1,
                      drift: bool = True) -> CoalescenceReport:
    """Measure phi rate over single blocks, blocks_used over full runs, and drift."""
    collapse_steps = phase_plan(g, k).collapse_steps
    if jobs <= 1:
        _stats_init(g, k, seed, collapse_steps, drift)
        phi_parts = [_phi_chunk((0, trials))]
        run_parts = [_runs_chunk((0, trials))]
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(jobs, initializer=_stats_init,
                      initargs=(g, k, seed, collapse_steps, drift)) as pool:
            phi_parts = pool.map(_phi_chunk, _spans(trials, jobs * 2))
            run_parts = pool.map(_runs_chunk, _spans(trials, jobs * 2))
    phis = sum(p for p, _ in phi_parts)
    bins: dict[int, list[int]] = {}
    for _, part in phi_parts:
        _merge_bins(bins, part)
    blocks_used = [b for part in run_parts for b in part]
    profile = {}
    for x in sorted(bins):
        cnt, total, sq = bins[x]
        mean = total / cnt
        var = (sq - total * total / cnt) / (cnt - 1) if cnt > 1 else 0.0
        profile[x] = DriftBin(cnt, mean, math.sqrt(max(var, 0.0) / cnt))
    return CoalescenceReport(
        trials=trials,
        phi_rate=phis / trials,
        mean_blocks=sum(blocks_used) / len(blocks_used),
        blocks_used=blocks_used,
        drift_profile=profile,
    )


def random_bounded_degree_graph(n: int, max_deg: int, seed: int,
                                target_edges: int | None = None) -> Graph:
    """Random graph with every degree <= max_deg (near-regular when it fits)."""
    rng = random.Random(seed)
    if target_edges is None:
        target_edges = (n * max_deg) // 2
    deg = [0] * n
    edges: set[tuple[int, int]] = set()
    attempts = 0
    limit = 60 * target_edges + 100
    while len(edges) < target_edges and attempts < limit:
        attempts += 1
        u = rng.randrange(n)
        w = rng.randrange(n)
        if u == w:
            continue
        e = (u, w) if u < w else (w, u)
        if e in edges or deg[u] >= max_deg or deg[w] >= max_deg:
            continue
        edges.add(e)
        deg[u] += 1
        deg[w] += 1
    return Graph.from_edges(n, edges)
