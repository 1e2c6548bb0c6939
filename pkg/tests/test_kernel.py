import math

import pytest

from perfectcolor import Graph
from perfectcolor.kernel import (
    COMPRESS,
    CONTRACT,
    BoundingState,
    ContractPreconditionError,
    MalformedTupleError,
    PaletteSnapshot,
    compress_decode,
    compress_gen,
    contract_decode,
    contract_gen,
    decode_color,
    palette,
    tuple_from_record,
    tuple_to_record,
)
from perfectcolor.oracle import compatible_proper_colorings
from perfectcolor.phases import generate_block
from perfectcolor.randomness import substream


def _mask(colors):
    m = 0
    for c in colors:
        m |= 1 << (c - 1)
    return m


def _star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def test_bounding_state_init():
    st = BoundingState(3, 7)
    assert st.colors(0) == frozenset(range(1, 8))
    assert st.singleton_count == 0
    assert not st.all_singleton
    st_one_color = BoundingState(4, 1)
    assert st_one_color.all_singleton  # [1] lists are already singletons


def test_palette_isolated():
    g = Graph.from_edges(1, [])
    st = BoundingState(1, 5)
    assert palette(st, g, 0) == PaletteSnapshot(0, 0)


def test_palette_singleton_neighbors():
    g = _star(3)
    st = BoundingState(4, 10)
    for leaf, color in zip((1, 2, 3), ((1,), (2,), (3,))):
        st.set_mask(leaf, _mask(color))
    assert palette(st, g, 0) == PaletteSnapshot(3, 3)


def test_palette_mixed_lists():
    g = _star(3)
    st = BoundingState(4, 10)
    st.set_mask(1, _mask((1, 2)))
    st.set_mask(2, _mask((2, 3)))
    st.set_mask(3, _mask((4,)))
    assert palette(st, g, 0) == PaletteSnapshot(4, 1)


def test_compress_gen_shape():
    st = BoundingState(2, 7)
    t = compress_gen(st, 0, (1, 2), substream(5, 0, 1))
    assert t.kind == COMPRESS
    assert len(t.colors) == 3
    assert set(t.colors[:2]) == {1, 2}
    assert t.colors[2] in {3, 4, 5, 6, 7}
    assert st.colors(0) == frozenset({1, 2, t.colors[2]})
    assert st.size(0) == 3
    assert t.snapshot is None


def test_compress_gen_empty_set():
    st = BoundingState(1, 4)
    t = compress_gen(st, 0, (), substream(6, 0, 1))
    assert len(t.colors) == 1
    assert st.colors(0) == frozenset({t.colors[0]})


def test_compress_gen_duplicate_set_rejected():
    st = BoundingState(1, 4)
    with pytest.raises(ValueError):
        compress_gen(st, 0, [1, 1], substream(6, 0, 1))


def test_compress_c1_uniform_outside_a():
    counts = {c: 0 for c in range(3, 8)}
    n = 50_000
    for i in range(n):
        st = BoundingState(1, 7)
        t = compress_gen(st, 0, (1, 2), substream(7, 0, i))
        counts[t.colors[-1]] += 1
    sigma = math.sqrt(n * 0.2 * 0.8)
    for c in counts.values():
        assert abs(c - n / 5) < 4 * sigma


def test_compress_decode_takes_c1_when_threshold_zero(p3=None):
    # k=7, delta=2, |chi(N(v))| = 2 makes p_chi = 1 - 5/5 = 0, so a valid
    # c1 is always the chosen color.
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    for i in range(50):
        st = BoundingState(3, 7)
        t = compress_gen(st, 1, (1, 2), substream(8, 0, i))
        chi = (1, 3, 2)
        out = compress_decode(t, g, 7, chi)
        assert out[1] == t.colors[-1]  # c1 in {3..7} is never blocked here
        assert out[0] == 1 and out[2] == 2


def test_compress_decode_falls_back_to_sigma():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    seen_fallback = 0
    for i in range(300):
        st = BoundingState(3, 7)
        t = compress_gen(st, 1, (3, 4), substream(9, 0, i))
        chi = (5, 1, 6)  # neighbors use colors 5, 6
        out = compress_decode(t, g, 7, chi)
        if t.colors[-1] in (5, 6):
            seen_fallback += 1
            # both sigma colors are valid, so the first one wins
            assert out[1] == t.colors[0]
        assert out[1] not in (5, 6)
    assert seen_fallback > 0


def test_compress_decode_wrong_kind():
    g = _star(1)
    st = BoundingState(2, 5)
    st.set_mask(1, _mask((2,)))
    t = contract_gen(st, g, 0, substream(10, 0, 1))
    with pytest.raises(MalformedTupleError):
        compress_decode(t, g, 5, (1, 2))


def test_contract_precondition_error():
    g = _star(3)
    st = BoundingState(4, 10)  # fresh lists: s = 10 >= k - delta = 7
    with pytest.raises(ContractPreconditionError) as err:
        contract_gen(st, g, 0, substream(11, 0, 1))
    assert err.value.s == 10 and err.value.k == 10 and err.value.delta == 3


def test_contract_singleton_when_s_equals_q():
    # neighbor lists {1},{2},{3}: s = q = 3, p_L = 1, always a singleton
    g = _star(3)
    for i in range(50):
        st = BoundingState(4, 10)
        for leaf, color in zip((1, 2, 3), ((1,), (2,), (3,))):
            st.set_mask(leaf, _mask(color))
        t = contract_gen(st, g, 0, substream(12, 0, i))
        assert len(t.colors) == 1
        assert st.size(0) == 1
        assert t.colors[0] not in {1, 2, 3}
        assert (t.s, t.q) == (3, 3)


def test_contract_singleton_rate_matches_p_l():
    # s=6, q=0, k=10, delta=3: p_L = 1 - 6/7 = 1/7
    g = _star(3)
    n = 10_000
    singles = 0
    for i in range(n):
        st = BoundingState(4, 10)
        st.set_mask(1, _mask((1, 2)))
        st.set_mask(2, _mask((3, 4)))
        st.set_mask(3, _mask((5, 6)))
        t = contract_gen(st, g, 0, substream(13, 0, i))
        assert (t.s, t.q) == (6, 0)
        assert len(t.colors) in (1, 2)
        assert st.size(0) == len(t.colors)
        singles += len(t.colors) == 1
    sigma = math.sqrt(n * (1 / 7) * (6 / 7))
    assert abs(singles - n / 7) < 4 * sigma


def test_contract_decode_singleton_unconditional():
    g = _star(1)
    st = BoundingState(2, 5)
    st.set_mask(1, _mask((2,)))
    t = contract_gen(st, g, 0, substream(14, 0, 3))
    assert len(t.colors) == 1
    out = contract_decode(t, g, 5, (1, 2))
    assert out == (t.colors[0], 2)


def test_contract_decode_isolated_uniform():
    # delta=0, k=4: S=Q=empty, p_chi=1, new color = c1 uniform over [k]
    g = Graph.from_edges(1, [])
    counts = {c: 0 for c in range(1, 5)}
    n = 40_000
    for i in range(n):
        st = BoundingState(1, 4)
        t = contract_gen(st, g, 0, substream(15, 0, i))
        out = contract_decode(t, g, 4, (3,))
        counts[out[0]] += 1
    sigma = math.sqrt(n * 0.25 * 0.75)
    for c in counts.values():
        assert abs(c - n / 4) < 4 * sigma


def test_contract_decode_malformed():
    g = _star(1)
    st = BoundingState(2, 5)
    st.set_mask(1, _mask((2,)))
    t = contract_gen(st, g, 0, substream(16, 0, 1))
    t_bad = type(t)(CONTRACT, 0, t.tau, (1, 2, 3), 1, 1)
    with pytest.raises(MalformedTupleError):
        contract_decode(t_bad, g, 5, (1, 2))
    with pytest.raises(MalformedTupleError):
        contract_decode(compress_gen(BoundingState(2, 5), 0, (1,), substream(16, 0, 2)),
                        g, 5, (1, 2))


def _snapshot_state(state):
    clone = BoundingState(state.n, state.k)
    for v in range(state.n):
        clone.set_mask(v, state.masks[v])
    return clone


def test_sandwiching_and_locality():
    # For every chi compatible with L before an update, decode(chi) is
    # compatible with L' after, and only the updated vertex changes.
    graphs = {
        "K3": Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)]),
        "P4": Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]),
    }
    for g in graphs.values():
        k = 7
        for seed in (101, 202):
            before_states = []
            block = generate_block(g, k, seed, 0, keep_tuples=True,
                                   observer=_StateRecorder(before_states))
            for t, before in zip(block.tuples[:12], before_states[:12]):
                after_mask = _after_mask(t)
                for chi in compatible_proper_colorings(g, before):
                    new_color = decode_color(t, g, k, chi)
                    assert (after_mask >> (new_color - 1)) & 1
                    out = contract_decode(t, g, k, chi) if t.kind == CONTRACT \
                        else compress_decode(t, g, k, chi)
                    assert all(out[w] == chi[w] for w in range(g.n) if w != t.vertex)


class _StateRecorder:
    def __init__(self, sink):
        self.sink = sink

    def pre_update(self, step, kind, vertex, spruce_set, state):
        self.sink.append(_snapshot_state(state))

    def post_update(self, step, kind, vertex, state):
        pass


def _after_mask(t):
    m = 0
    for c in t.colors if t.kind == CONTRACT else set(t.colors):
        m |= 1 << (c - 1)
    return m


def test_tuple_record_roundtrip():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    block = generate_block(g, 7, 77, 0, keep_tuples=True)
    chi = (1, 2, 3)
    for t in block.tuples[:10]:
        rec = tuple_to_record(t)
        back = tuple_from_record(rec, block.master, block.index)
        assert back.kind == t.kind and back.vertex == t.vertex
        assert back.colors == t.colors and (back.s, back.q) == (t.s, t.q)
        assert decode_color(back, g, 7, chi) == decode_color(t, g, 7, chi)
