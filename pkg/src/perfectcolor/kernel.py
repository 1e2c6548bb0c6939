"""The two bounding-chain update primitives: compress and contract.

Each primitive comes as a pair: a ``*_gen`` procedure that draws the
randomness, mutates the bounding state in place, and emits a persistable
update tuple; and a ``*_decode`` procedure that applies a previously
generated tuple to a concrete coloring.  Decoding never needs the color
lists themselves: a tuple carries only the updated vertex, the lazy real
``tau``, the candidate colors ``M``, and (for contract) the palette sizes
``(s, q)`` captured before the mutation, so per-tuple storage is O(degree)
rather than O(n * k).

Color lists are bitmasks (bit ``c - 1`` set means color ``c`` is present).
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .graph import Graph
from .randomness import BitStream, LazyReal, random_permutation, uniform_color_from_mask

COMPRESS = "compress"
CONTRACT = "contract"


class ContractPreconditionError(RuntimeError):
    """Contract requires a spruced neighborhood: |S_L(v)| < k - max_degree."""

    def __init__(self, s: int, k: int, delta: int):
        self.s, self.k, self.delta = s, k, delta
        super().__init__(
            f"neighborhood palette too large for contract: |S|={s}, need < k-Δ={k - delta}"
        )


class MalformedTupleError(ValueError):
    """An update tuple does not satisfy its structural invariants."""


class PaletteSnapshot(NamedTuple):
    """Sizes of the neighborhood palette: s = |S_L(v)|, q = |Q_L(v)|."""

    s: int
    q: int


class BoundingState:
    """Per-vertex color lists L(v), with a singleton-count cache.

    ``masks`` and ``sizes`` are mutated exclusively by the generators in
    this module and by the fused block engine; treat them as read-only
    everywhere else.
    """

    __slots__ = ("n", "k", "masks", "sizes", "nsingle")

    def __init__(self, n: int, k: int):
        if k < 1:
            raise ValueError("need at least one color")
        full = (1 << k) - 1
        self.n = n
        self.k = k
        self.masks = [full] * n
        self.sizes = [k] * n
        self.nsingle = n if k == 1 else 0

    def colors(self, v: int) -> frozenset[int]:
        """The list L(v) as a set of 1-based colors."""
        mask = self.masks[v]
        return frozenset(c + 1 for c in range(self.k) if (mask >> c) & 1)

    def size(self, v: int) -> int:
        return self.sizes[v]

    @property
    def singleton_count(self) -> int:
        return self.nsingle

    @property
    def all_singleton(self) -> bool:
        return self.nsingle == self.n

    def set_mask(self, v: int, mask: int) -> None:
        if mask == 0:
            raise ValueError("color lists must stay nonempty")
        new = mask.bit_count()
        old = self.sizes[v]
        self.masks[v] = mask
        self.sizes[v] = new
        if old == 1:
            if new != 1:
                self.nsingle -= 1
        elif new == 1:
            self.nsingle += 1

    def coloring(self) -> tuple[int, ...]:
        """The unique compatible coloring once every list is a singleton."""
        if not self.all_singleton:
            raise ValueError("state has non-singleton lists")
        return tuple(m.bit_length() for m in self.masks)


def palette_masks(state: BoundingState, g: Graph, v: int) -> tuple[int, int]:
    """Bitmasks of S_L(v) (all neighbor colors) and Q_L(v) (singleton ones)."""
    s_mask = 0
    q_mask = 0
    masks = state.masks
    sizes = state.sizes
    for w in g.adj[v]:
        mw = masks[w]
        s_mask |= mw
        if sizes[w] == 1:
            q_mask |= mw
    return s_mask, q_mask


def palette(state: BoundingState, g: Graph, v: int) -> PaletteSnapshot:
    """Sizes of the neighborhood palette sets at v."""
    s_mask, q_mask = palette_masks(state, g, v)
    return PaletteSnapshot(s_mask.bit_count(), q_mask.bit_count())


class UpdateTuple:
    """Persisted record of one update.

    ``colors`` is the candidate sequence M: for compress it is
    ``(sigma..., c1)`` of length |A|+1; for contract it is ``(c1,)`` or
    ``(c1, c2)``.  ``s``/``q`` are the contract palette snapshot (None for
    compress).  ``tau`` keeps the digit prefix consumed so far plus a
    handle into its substream, so later decodes extend it consistently.
    """

    __slots__ = ("kind", "vertex", "tau", "colors", "s", "q")

    def __init__(self, kind: str, vertex: int, tau: LazyReal, colors: tuple[int, ...],
                 s: int | None = None, q: int | None = None):
        self.kind = kind
        self.vertex = vertex
        self.tau = tau
        self.colors = colors
        self.s = s
        self.q = q

    @property
    def snapshot(self) -> PaletteSnapshot | None:
        if self.kind == CONTRACT:
            return PaletteSnapshot(self.s, self.q)
        return None

    def __repr__(self) -> str:
        extra = f", s={self.s}, q={self.q}" if self.kind == CONTRACT else ""
        return f"UpdateTuple({self.kind}, v={self.vertex}, M={self.colors}{extra})"


def compress_gen(state: BoundingState, v: int, spruce_set: Iterable[int],
                 stream: BitStream) -> UpdateTuple:
    """Force v's list into A + one random color outside A.

    ``spruce_set`` is the set A; in the collapse phase |A| equals the
    graph's maximum degree.  Draw order on the stream: the permutation
    sigma of sorted(A), then c1 uniform over [k] \\ A; tau consumes digits
    only later, at decode time.
    """
    k = state.k
    a_sorted = sorted(spruce_set)
    a_mask = 0
    for c in a_sorted:
        if not (1 <= c <= k):
            raise ValueError(f"spruce color {c} outside [1, {k}]")
        a_mask |= 1 << (c - 1)
    if a_mask.bit_count() != len(a_sorted):
        raise ValueError("spruce set contains duplicates")
    sigma = random_permutation(stream, a_sorted)
    c1 = uniform_color_from_mask(stream, ((1 << k) - 1) & ~a_mask)
    state.set_mask(v, a_mask | (1 << (c1 - 1)))
    tau = LazyReal(stream)
    return UpdateTuple(COMPRESS, v, tau, tuple(sigma) + (c1,))


def contract_gen(state: BoundingState, g: Graph, v: int, stream: BitStream) -> UpdateTuple:
    """Shrink v's list to {c1} (probability p_L) or {c1, c2}.

    Requires the neighborhood to be spruced: |S_L(v)| < k - max_degree.
    Draw order on the stream: c1 uniform outside S, then (when S != Q)
    c2 uniform over S \\ Q, then the digits of tau needed to resolve
    tau <= p_L.
    """
    k = state.k
    d = g.max_degree
    s_mask, q_mask = palette_masks(state, g, v)
    s = s_mask.bit_count()
    q = q_mask.bit_count()
    if s >= k - d:
        raise ContractPreconditionError(s, k, d)
    c1 = uniform_color_from_mask(stream, ((1 << k) - 1) & ~s_mask)
    sq_mask = s_mask & ~q_mask
    c2 = uniform_color_from_mask(stream, sq_mask) if sq_mask else None
    tau = LazyReal(stream)
    # p_L = 1 - (s - q)/(k - delta); equals 1 when S = Q, so the singleton
    # branch then fires without touching tau.
    if tau.le(k - d - (s - q), k - d):
        state.set_mask(v, 1 << (c1 - 1))
        colors: tuple[int, ...] = (c1,)
    else:
        state.set_mask(v, (1 << (c1 - 1)) | (1 << (c2 - 1)))
        colors = (c1, c2)
    return UpdateTuple(CONTRACT, v, tau, colors, s, q)


def _neighbor_color_mask(g: Graph, v: int, chi: Sequence[int]) -> int:
    mask = 0
    for w in g.adj[v]:
        mask |= 1 << (chi[w] - 1)
    return mask


def decode_color(t: UpdateTuple, g: Graph, k: int, chi: Sequence[int]) -> int:
    """The new color of t.vertex when the update is applied to chi.

    This is the single decoding core; both public decode operations and
    block application go through it.  ``chi`` must be a proper coloring
    compatible with the update's precondition lists.
    """
    v = t.vertex
    nbr = _neighbor_color_mask(g, v, chi)
    m = nbr.bit_count()
    colors = t.colors
    if t.kind == CONTRACT:
        if not (1 <= len(colors) <= 2):
            raise MalformedTupleError(f"contract tuple with |M|={len(colors)}")
        if len(colors) == 1:
            # tau <= p_L <= p_chi already held at generation.
            return colors[0]
        # p_chi = 1 - (s - q)/(k - m); threshold order p_L <= p_chi holds
        # because m <= max_degree.
        assert m <= g.max_degree, "coloring uses more neighbor colors than the degree bound"
        if t.tau.le(k - m - (t.s - t.q), k - m) or (nbr >> (colors[1] - 1)) & 1:
            return colors[0]
        return colors[1]
    if t.kind == COMPRESS:
        if not colors:
            raise MalformedTupleError("compress tuple with empty M")
        delta = len(colors) - 1
        c1 = colors[-1]
        # c1 is taken when it is valid and tau >= p_chi = 1 - (k-delta)/(k-m).
        if not (nbr >> (c1 - 1)) & 1 and not t.tau.le(delta - m, k - m):
            return c1
        for c in colors[:delta]:
            if not (nbr >> (c - 1)) & 1:
                return c
        raise MalformedTupleError(
            "no valid color in M; the coloring violates the tuple's precondition"
        )
    raise MalformedTupleError(f"unknown update kind {t.kind!r}")


def compress_decode(t: UpdateTuple, g: Graph, k: int, chi: Sequence[int]) -> tuple[int, ...]:
    """Apply a compress tuple to chi; only t.vertex changes."""
    if t.kind != COMPRESS:
        raise MalformedTupleError(f"expected a compress tuple, got {t.kind}")
    out = list(chi)
    out[t.vertex] = decode_color(t, g, k, chi)
    return tuple(out)


def contract_decode(t: UpdateTuple, g: Graph, k: int, chi: Sequence[int]) -> tuple[int, ...]:
    """Apply a contract tuple to chi; only t.vertex changes."""
    if t.kind != CONTRACT:
        raise MalformedTupleError(f"expected a contract tuple, got {t.kind}")
    out = list(chi)
    out[t.vertex] = decode_color(t, g, k, chi)
    return tuple(out)


def tuple_to_record(t: UpdateTuple) -> dict:
    """JSON-ready transcript record: kind, vertex, tau prefix + stream path, M, (s, q)."""
    tau = t.tau
    bits, length = tau.prefix
    master, block, stream_step, position = tau.resume_info()
    rec = {
        "kind": t.kind,
        "v": t.vertex,
        "step": stream_step - 1,
        "tau_bits": bits,
        "tau_len": length,
        "tau_pos": position,
        "M": list(t.colors),
    }
    if t.kind == CONTRACT:
        rec["s"] = t.s
        rec["q"] = t.q
    return rec


def tuple_from_record(rec: dict, master: int, block: int) -> UpdateTuple:
    """Rebuild an update tuple from a transcript record."""
    kind = rec["kind"]
    if kind not in (COMPRESS, CONTRACT):
        raise MalformedTupleError(f"unknown update kind {kind!r}")
    tau = LazyReal.restore(
        rec["tau_bits"], rec["tau_len"],
        resume=(master, block, rec["step"] + 1, rec["tau_pos"]),
    )
    return UpdateTuple(kind, rec["v"], tau, tuple(rec["M"]), rec.get("s"), rec.get("q"))
