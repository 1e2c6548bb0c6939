"""One block of T updates: the collapse phase followed by coalescence.

A block starts from the full bounding state (every list is [k]).  The
collapse phase spends |E| + n updates bringing every list down to size at
most 2: for each vertex in order, its later neighbors are compressed with
a shared spruce set, then the vertex itself is contracted.  The
coalescence phase then performs T' contract updates at uniformly random
vertices, after which, with probability at least 1/2, every list is a
singleton and the block's update composition is a constant function.

``collapse_phase``/``coalescence_phase`` build blocks from the kernel
primitives and are the readable reference; ``generate_block`` is a fused
generator that draws exactly the same bits in exactly the same order (a
test asserts tuple-for-tuple equality) but runs several times faster,
which the statistical acceptance checks rely on.

Substream layout within block b: stream (b, 0) drives the coalescence
vertex schedule; stream (b, 1 + t) carries all randomness of the update
at step t (draws first, then tau digits; tau digits requested after
generation continue from the stream position where generation stopped).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

from .graph import Graph, is_proper
from .kernel import (
    COMPRESS,
    CONTRACT,
    BoundingState,
    ContractPreconditionError,
    UpdateTuple,
    compress_gen,
    contract_gen,
    tuple_from_record,
    tuple_to_record,
)
from .randomness import (
    BitStream,
    EntropyExhaustedError,
    LazyReal,
    substream,
    uniform_index,
)

_Z8 = (0).to_bytes(8, "big")
_BIT_CAP = 4096


@dataclass(frozen=True)
class PhasePlan:
    """Step budget of one block: T' coalescence steps after |E|+n collapse steps."""

    t_prime: int
    collapse_steps: int

    @property
    def total(self) -> int:
        return self.t_prime + self.collapse_steps


def coalescence_horizon(n: int, k: int, delta: int) -> int:
    """Number of coalescence steps: ceil(2 * (k-delta)/(k-3*delta) * n * ln n).

    Computed in double precision; when the value lands within 1e-9 of an
    integer the result is bumped up by one so rounding can never shorten
    the phase (n = 1 is exact: ln 1 = 0).
    """
    if k <= 3 * delta:
        raise ValueError(f"k={k} <= 3*delta={3 * delta}")
    if n <= 1:
        return 0
    x = 2.0 * (k - delta) / (k - 3 * delta) * n * math.log(n)
    nearest = round(x)
    if abs(x - nearest) < 1e-9:
        return int(nearest) + 1
    return math.ceil(x)


def phase_plan(g: Graph, k: int) -> PhasePlan:
    return PhasePlan(
        t_prime=coalescence_horizon(g.n, k, g.max_degree),
        collapse_steps=g.m + g.n,
    )


def phi(state: BoundingState) -> bool:
    """True iff every list is a singleton (O(1) via the cached count)."""
    return state.all_singleton


def choose_spruce_set(state: BoundingState, g: Graph, i: int) -> tuple[int, ...]:
    """Deterministic spruce set A for vertex i, |A| = max_degree.

    Takes the minimum color of each earlier neighbor's list (so A meets
    every one of those lists), deduplicates, and pads with the smallest
    unused colors.  Callable only while all earlier lists have size <= 2,
    which the collapse schedule guarantees.
    """
    d = g.max_degree
    if d == 0:
        return ()
    a_mask = 0
    masks = state.masks
    for w in g.adj[i]:
        if w < i:
            lw = masks[w]
            a_mask |= lw & -lw
    c = 1
    need = d - a_mask.bit_count()
    while need > 0:
        bit = 1 << (c - 1)
        if not a_mask & bit:
            a_mask |= bit
            need -= 1
        c += 1
    colors = []
    mm = a_mask
    while mm:
        low = mm & -mm
        colors.append(low.bit_length())
        mm ^= low
    return tuple(colors)


class StepStreams:
    """Hands out the per-update substream for consecutive step indices."""

    def __init__(self, master: int, block: int, first_step: int = 0):
        self.master = master
        self.block = block
        self.step = first_step

    def next(self) -> BitStream:
        s = substream(self.master, self.block, 1 + self.step)
        self.step += 1
        return s


def spruce_up(state: BoundingState, g: Graph, i: int, streams: StepStreams) -> list[UpdateTuple]:
    """Compress every later neighbor of vertex i with a shared spruce set.

    Afterwards the union of i's neighbor lists has at most 2*max_degree
    colors: each neighbor contributes at most one color outside A.
    """
    a = choose_spruce_set(state, g, i)
    out = []
    for w in g.adj[i]:
        if w > i:
            out.append(compress_gen(state, w, a, streams.next()))
    return out


def collapse_phase(g: Graph, k: int, master: int, block_index: int
                   ) -> tuple[list[UpdateTuple], BoundingState]:
    """Run the collapse schedule; returns its |E| + n tuples and the state.

    Starting from L(v) = [k] for all v, afterwards every list has size at
    most 2.  Requires k > 3*max_degree (the contract precondition then
    cannot trip, since spruced palettes have at most 2*max_degree colors).
    """
    state = BoundingState(g.n, k)
    streams = StepStreams(master, block_index)
    tuples: list[UpdateTuple] = []
    for i in range(g.n):
        tuples.extend(spruce_up(state, g, i, streams))
        tuples.append(contract_gen(state, g, i, streams.next()))
    return tuples, state


def coalescence_phase(state: BoundingState, g: Graph, k: int, t_prime: int,
                      master: int, block_index: int,
                      first_step: int | None = None) -> list[UpdateTuple]:
    """t_prime contract updates at uniformly random vertices.

    The vertex schedule comes from substream (block, 0), disjoint from all
    per-update streams.  List sizes stay at most 2 throughout, so every
    neighborhood remains spruced and the contract precondition holds.
    """
    if first_step is None:
        first_step = g.m + g.n
    streams = StepStreams(master, block_index, first_step)
    schedule = substream(master, block_index, 0)
    out = []
    for _ in range(t_prime):
        v = uniform_index(schedule, g.n)
        out.append(contract_gen(state, g, v, streams.next()))
    return out


@dataclass
class Block:
    """One generated length-T update sequence plus its verdict.

    ``coloring`` is the unique compatible coloring when ``phi`` holds.
    ``tuples`` is None for blocks generated in probe mode (the sampler
    regenerates them deterministically if they are ever needed).
    """

    index: int
    master: int
    k: int
    phi: bool
    coloring: tuple[int, ...] | None
    tuples: list[UpdateTuple] | None
    plan: PhasePlan


def generate_block(g: Graph, k: int, master: int, index: int, *,
                   keep_tuples: bool = True, observer=None) -> Block:
    """Generate block ``index``: collapse, coalescence, and the phi verdict.

    Fused fast path drawing the same bits as the kernel primitives (see
    module docstring).  With ``keep_tuples=False`` no tuple objects are
    materialized, which roughly halves the cost of a phi probe.  An
    observer, when given, receives ``pre_update(step, kind, vertex,
    spruce_set, state)`` and ``post_update(step, kind, vertex, state)``
    around every update with the live state synced.
    """
    n = g.n
    d = g.max_degree
    adj = g.adj
    plan = phase_plan(g, k)
    state = BoundingState(n, k)
    masks = state.masks
    sizes = state.sizes
    nsingle = state.nsingle
    full = (1 << k) - 1
    kd = k - d
    sha = hashlib.sha256
    pfx = master.to_bytes(8, "big") + index.to_bytes(8, "big")
    keep = keep_tuples
    tuples: list[UpdateTuple] | None = [] if keep else None
    step = 0

    def do_contract(v: int) -> None:
        nonlocal nsingle
        if observer is not None:
            state.nsingle = nsingle
            observer.pre_update(step, CONTRACT, v, None, state)
        key = pfx + (1 + step).to_bytes(8, "big")
        buf = int.from_bytes(sha(key + _Z8).digest(), "big")
        nb = 256
        ctr = 1
        s_mask = 0
        q_mask = 0
        for w in adj[v]:
            mw = masks[w]
            s_mask |= mw
            if sizes[w] == 1:
                q_mask |= mw
        s = s_mask.bit_count()
        q = q_mask.bit_count()
        if s >= kd:
            raise ContractPreconditionError(s, k, d)
        # c1 uniform over the complement of S
        m1 = k - s
        if m1 == 1:
            r = 0
        else:
            nbits = (m1 - 1).bit_length()
            while True:
                if nb < nbits:
                    buf = (buf << 256) | int.from_bytes(
                        sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                    nb += 256
                    ctr += 1
                nb -= nbits
                r = buf >> nb
                buf &= (1 << nb) - 1
                if r < m1:
                    break
        mm = full & ~s_mask
        for _ in range(r):
            mm &= mm - 1
        c1b = mm & -mm
        sq_mask = s_mask & ~q_mask
        tbits = 0
        tlen = 0
        if sq_mask:
            # c2 uniform over S \ Q
            m2 = s - q
            if m2 == 1:
                r = 0
            else:
                nbits = (m2 - 1).bit_length()
                while True:
                    if nb < nbits:
                        buf = (buf << 256) | int.from_bytes(
                            sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                        nb += 256
                        ctr += 1
                    nb -= nbits
                    r = buf >> nb
                    buf &= (1 << nb) - 1
                    if r < m2:
                        break
            mm = sq_mask
            for _ in range(r):
                mm &= mm - 1
            c2b = mm & -mm
            # walk tau against p_L = (k - d - (s-q)) / (k - d)
            rr = kd - m2
            le = -1
            while le < 0:
                rr <<= 1
                if rr >= kd:
                    qb = 1
                    rr -= kd
                else:
                    qb = 0
                if nb < 1:
                    buf = (buf << 256) | int.from_bytes(
                        sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                    nb += 256
                    ctr += 1
                nb -= 1
                tb = (buf >> nb) & 1
                buf &= (1 << nb) - 1
                tbits = (tbits << 1) | tb
                tlen += 1
                if tb != qb:
                    le = 1 if tb < qb else 0
                elif rr == 0:
                    while True:
                        if nb < 1:
                            buf = (buf << 256) | int.from_bytes(
                                sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                            nb += 256
                            ctr += 1
                        nb -= 1
                        tb = (buf >> nb) & 1
                        buf &= (1 << nb) - 1
                        tbits = (tbits << 1) | tb
                        tlen += 1
                        if tb:
                            le = 0
                            break
                        if tlen > _BIT_CAP:
                            raise EntropyExhaustedError("tau comparison exceeded the bit cap")
                if tlen > _BIT_CAP:
                    raise EntropyExhaustedError("tau comparison exceeded the bit cap")
            if le:
                newmask = c1b
                colors = (c1b.bit_length(),)
            else:
                newmask = c1b | c2b
                colors = (c1b.bit_length(), c2b.bit_length())
        else:
            # S = Q makes p_L = 1: the singleton branch fires, no tau digits.
            newmask = c1b
            colors = (c1b.bit_length(),)
        old = sizes[v]
        new = 2 if newmask & (newmask - 1) else 1
        masks[v] = newmask
        sizes[v] = new
        if old == 1:
            if new != 1:
                nsingle -= 1
        elif new == 1:
            nsingle += 1
        if keep:
            tau = LazyReal.restore(
                tbits, tlen, resume=(master, index, 1 + step, 256 * ctr - nb))
            tuples.append(UpdateTuple(CONTRACT, v, tau, colors, s, q))
        if observer is not None:
            state.nsingle = nsingle
            observer.post_update(step, CONTRACT, v, state)

    # ---- collapse phase: spruce up later neighbors, then contract v_i ----
    for i in range(n):
        a_cols = choose_spruce_set(state, g, i)
        da = len(a_cols)
        a_mask = 0
        for c in a_cols:
            a_mask |= 1 << (c - 1)
        comp_a = full & ~a_mask
        ma = k - da
        nbits_ma = (ma - 1).bit_length()
        for w in adj[i]:
            if w <= i:
                continue
            if observer is not None:
                state.nsingle = nsingle
                observer.pre_update(step, COMPRESS, w, a_cols, state)
            key = pfx + (1 + step).to_bytes(8, "big")
            buf = int.from_bytes(sha(key + _Z8).digest(), "big")
            nb = 256
            ctr = 1
            # sigma: Fisher-Yates over sorted(A)
            sig = list(a_cols)
            for ii in range(da - 1, 0, -1):
                nbits = ii.bit_length()
                while True:
                    if nb < nbits:
                        buf = (buf << 256) | int.from_bytes(
                            sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                        nb += 256
                        ctr += 1
                    nb -= nbits
                    r = buf >> nb
                    buf &= (1 << nb) - 1
                    if r <= ii:
                        break
                sig[ii], sig[r] = sig[r], sig[ii]
            # c1 uniform over [k] \ A
            if ma == 1:
                r = 0
            else:
                while True:
                    if nb < nbits_ma:
                        buf = (buf << 256) | int.from_bytes(
                            sha(key + ctr.to_bytes(8, "big")).digest(), "big")
                        nb += 256
                        ctr += 1
                    nb -= nbits_ma
                    r = buf >> nb
                    buf &= (1 << nb) - 1
                    if r < ma:
                        break
            mm = comp_a
            for _ in range(r):
                mm &= mm - 1
            c1b = mm & -mm
            old = sizes[w]
            new = da + 1
            masks[w] = a_mask | c1b
            sizes[w] = new
            if old == 1:
                if new != 1:
                    nsingle -= 1
            elif new == 1:
                nsingle += 1
            if keep:
                tau = LazyReal.restore(
                    0, 0, resume=(master, index, 1 + step, 256 * ctr - nb))
                tuples.append(UpdateTuple(COMPRESS, w, tau, tuple(sig) + (c1b.bit_length(),)))
            if observer is not None:
                state.nsingle = nsingle
                observer.post_update(step, COMPRESS, w, state)
            step += 1
        do_contract(i)
        step += 1

    # ---- coalescence phase: contract at scheduled random vertices ----
    sbuf = 0
    snb = 0
    sctr = 0
    skey = pfx + _Z8
    nbv = (n - 1).bit_length()
    for _ in range(plan.t_prime):
        if n == 1:
            v = 0
        else:
            while True:
                if snb < nbv:
                    sbuf = (sbuf << 256) | int.from_bytes(
                        sha(skey + sctr.to_bytes(8, "big")).digest(), "big")
                    snb += 256
                    sctr += 1
                snb -= nbv
                v = sbuf >> snb
                sbuf &= (1 << snb) - 1
                if v < n:
                    break
        do_contract(v)
        step += 1

    state.nsingle = nsingle
    phi_true = nsingle == n
    coloring = None
    if phi_true:
        coloring = tuple(m.bit_length() for m in masks)
        if not is_proper(g, coloring):
            raise RuntimeError("bounding chain collapsed to an improper coloring")
    return Block(index, master, k, phi_true, coloring, tuples, plan)


def block_to_record(b: Block) -> dict:
    """JSON-ready transcript of a block (requires kept tuples)."""
    if b.tuples is None:
        raise ValueError("block was generated without tuples; regenerate with keep_tuples=True")
    return {
        "index": b.index,
        "master": b.master,
        "k": b.k,
        "phi": b.phi,
        "coloring": list(b.coloring) if b.coloring is not None else None,
        "t_prime": b.plan.t_prime,
        "collapse_steps": b.plan.collapse_steps,
        "tuples": [tuple_to_record(t) for t in b.tuples],
    }


def block_from_record(rec: dict) -> Block:
    """Rebuild a block from a transcript record."""
    plan = PhasePlan(rec["t_prime"], rec["collapse_steps"])
    tuples = [tuple_from_record(tr, rec["master"], rec["index"]) for tr in rec["tuples"]]
    coloring = tuple(rec["coloring"]) if rec["coloring"] is not None else None
    return Block(rec["index"], rec["master"], rec["k"], rec["phi"], coloring, tuples, plan)
