"""The outer coupling-from-the-past loop.

Blocks cover progressively earlier time windows (block i spans
[-(i+1)T, -iT-1], so block 0 is the most recent).  Blocks are generated
until one certifies a constant update composition (phi true); the unique
coloring it pins down is then rolled forward through all more recent
blocks.  The result is exactly uniform over the proper k-colorings.

Blocks are probed without materializing tuples and regenerated
deterministically from (seed, block index) if the roll-forward needs
them, so a run holds at most one block's tuples in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Graph, is_proper, validate_instance
from .kernel import decode_color
from .phases import Block, generate_block


def apply_block(block: Block, chi, g: Graph) -> tuple[int, ...]:
    """Apply a block's updates to chi in chronological (earliest-first) order."""
    if block.tuples is None:
        raise ValueError("block was generated without tuples; regenerate with keep_tuples=True")
    k = block.k
    out = list(chi)
    for t in block.tuples:
        out[t.vertex] = decode_color(t, g, k, out)
    return tuple(out)


@dataclass
class SamplerRun:
    """Record of one sampler invocation; result is reproducible from the seed."""

    graph: Graph
    k: int
    seed: int
    coloring: tuple[int, ...]
    blocks_used: int
    blocks: list[Block] = field(default_factory=list, repr=False)


def sample_run(g: Graph, k: int, seed: int, keep_blocks: bool = False) -> SamplerRun:
    """Draw one exactly uniform proper k-coloring.

    ``keep_blocks`` retains every generated block (with tuples) on the
    returned record, for inspection and replay tests; by default blocks
    are probed tuple-free and only regenerated when the roll-forward
    needs them.
    """
    validate_instance(g, k)
    blocks: list[Block] = []
    i = 0
    while True:
        blk = generate_block(g, k, seed, i, keep_tuples=keep_blocks)
        if keep_blocks:
            blocks.append(blk)
        if blk.phi:
            break
        i += 1
    chi = blk.coloring
    for j in range(i - 1, -1, -1):
        earlier = blocks[j] if keep_blocks else generate_block(g, k, seed, j, keep_tuples=True)
        chi = apply_block(earlier, chi, g)
    if not is_proper(g, chi):
        raise RuntimeError("sampler produced an improper coloring")
    return SamplerRun(g, k, seed, chi, i + 1, blocks)


def perfect_sample(g: Graph, k: int, seed: int) -> tuple[tuple[int, ...], int]:
    """One exactly uniform proper k-coloring and the number of blocks used."""
    run = sample_run(g, k, seed)
    return run.coloring, run.blocks_used
