"""Seeded, reproducible, exact randomness.

Everything the sampler consumes is derived from a 64-bit master seed via
SHA-256 in counter mode, so any transcript can be replayed bit for bit by
an independent implementation.  The derivation recipe:

* ``substream(master, block, step)`` is the bit stream whose ``i``-th
  256-bit chunk is ``SHA-256(key || i)`` with
  ``key = master || block || step`` (all 64-bit big-endian); bits are
  consumed most-significant first within a chunk, chunks in order.
* Distinct ``(block, step)`` pairs give statistically independent streams
  under the usual assumptions on the mixer.
* ``uniform_index`` turns unbiased bits into exactly uniform integers by
  rejection sampling (never by modulo, which would bias the result).
* A ``LazyReal`` is a uniform random real in [0,1] materialized one binary
  digit at a time; comparisons against rationals are exact and extend the
  digit prefix only as far as needed, so thresholds suffer no floating
  point rounding at all.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import Iterable, Sequence

_CHUNK_BITS = 256
_BIT_CAP = 4096  # lazy-real comparisons never get near this in practice

LE = True
GT = False


class EntropyExhaustedError(RuntimeError):
    """A lazy comparison consumed an implausible number of bits (cap 4096)."""


def _check_u64(name: str, value: int) -> None:
    if not (0 <= value < (1 << 64)):
        raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")


class BitStream:
    """Deterministic unbiased bit stream addressed by (master, block, step)."""

    __slots__ = ("master", "block", "step", "_key", "_counter", "_buf", "_nbits", "consumed")

    def __init__(self, master: int, block: int, step: int):
        _check_u64("master seed", master)
        if block < 0 or step < 0:
            raise ValueError("block and step indices must be non-negative")
        self.master = master
        self.block = block
        self.step = step
        self._key = (
            master.to_bytes(8, "big") + block.to_bytes(8, "big") + step.to_bytes(8, "big")
        )
        self._counter = 0
        self._buf = 0
        self._nbits = 0
        self.consumed = 0

    def _refill(self) -> None:
        chunk = int.from_bytes(
            hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest(), "big"
        )
        self._counter += 1
        self._buf = (self._buf << _CHUNK_BITS) | chunk
        self._nbits += _CHUNK_BITS

    def bits(self, n: int) -> int:
        """Next n bits as an integer (first bit drawn is the most significant)."""
        while self._nbits < n:
            self._refill()
        self._nbits -= n
        out = self._buf >> self._nbits
        self._buf &= (1 << self._nbits) - 1
        self.consumed += n
        return out

    def bit(self) -> int:
        return self.bits(1)


def substream(master: int, block: int, step: int) -> BitStream:
    """Fresh bit stream for the given derivation path."""
    return BitStream(master, block, step)


def bitstream_at(master: int, block: int, step: int, consumed: int) -> BitStream:
    """Reopen a substream positioned after ``consumed`` bits, for replay."""
    s = BitStream(master, block, step)
    skip_chunks, skip_bits = divmod(consumed, _CHUNK_BITS)
    s._counter = skip_chunks
    if skip_bits:
        s._refill()
        s._nbits -= skip_bits
        s._buf &= (1 << s._nbits) - 1
    s.consumed = consumed
    return s


def uniform_index(stream: BitStream, m: int) -> int:
    """Exactly uniform integer in [0, m) via rejection sampling."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m == 1:
        return 0
    nbits = (m - 1).bit_length()
    while True:
        r = stream.bits(nbits)
        if r < m:
            return r


def uniform_color_from_mask(stream: BitStream, mask: int) -> int:
    """Uniform color from a nonempty bitmask (bit c-1 set means color c)."""
    m = mask.bit_count()
    if m == 0:
        raise ValueError("cannot sample from an empty color set")
    r = uniform_index(stream, m)
    mm = mask
    for _ in range(r):
        mm &= mm - 1
    return (mm & -mm).bit_length()


def uniform_from_set(stream: BitStream, k: int, excluded: Iterable[int]) -> int:
    """Exactly uniform color from [1, k] minus ``excluded``.

    Implemented as a uniform index mapped through the order statistics of
    the complement, so the draw is unbiased regardless of |excluded|.
    """
    mask = (1 << k) - 1
    for c in excluded:
        if 1 <= c <= k:
            mask &= ~(1 << (c - 1))
    if mask == 0:
        raise ValueError("excluded set covers all k colors")
    return uniform_color_from_mask(stream, mask)


def random_permutation(stream: BitStream, items: Sequence[int]) -> list[int]:
    """Exactly uniform permutation of ``items`` (Fisher-Yates)."""
    a = list(items)
    for i in range(len(a) - 1, 0, -1):
        j = uniform_index(stream, i + 1)
        a[i], a[j] = a[j], a[i]
    return a


class LazyReal:
    """A uniform real tau in [0,1] revealed one binary digit at a time.

    The consumed digit prefix is persisted, so comparing the same tau
    against several rationals is consistent with a single underlying real;
    digits beyond the prefix come from the backing stream, one per digit.
    The backing stream may be given lazily as a resume handle
    ``(master, block, step, consumed)`` and is only opened if a comparison
    actually needs fresh digits.
    """

    __slots__ = ("_stream", "_resume", "_bits", "_len")

    def __init__(self, stream: BitStream):
        self._stream = stream
        self._resume: tuple[int, int, int, int] | None = None
        self._bits = 0
        self._len = 0

    @classmethod
    def restore(cls, prefix_bits: int, prefix_len: int,
                stream: BitStream | None = None,
                resume: tuple[int, int, int, int] | None = None) -> "LazyReal":
        """Rebuild a lazy real from a recorded prefix and a stream position."""
        if (stream is None) == (resume is None):
            raise ValueError("provide exactly one of stream or resume")
        tau = cls.__new__(cls)
        tau._stream = stream
        tau._resume = resume
        tau._bits = prefix_bits
        tau._len = prefix_len
        return tau

    @property
    def prefix(self) -> tuple[int, int]:
        """(bits, length) of the digits revealed so far."""
        return self._bits, self._len

    def resume_info(self) -> tuple[int, int, int, int]:
        """(master, block, step, position) from which fresh digits continue."""
        if self._stream is not None:
            s = self._stream
            return s.master, s.block, s.step, s.consumed
        return self._resume

    def bit(self, i: int) -> int:
        if i >= _BIT_CAP:
            raise EntropyExhaustedError(f"lazy real comparison exceeded {_BIT_CAP} bits")
        while self._len <= i:
            if self._stream is None:
                self._stream = bitstream_at(*self._resume)
            self._bits = (self._bits << 1) | self._stream.bit()
            self._len += 1
        return (self._bits >> (self._len - 1 - i)) & 1

    def le(self, num: int, den: int) -> bool:
        """Exact test of tau <= num/den for 0 <= num/den <= 1.

        Walks the binary expansions until they differ.  Equality of tau
        with the threshold has probability zero, so the comparison resolves
        strictly with probability 1 (hence the untriggered bit cap).
        """
        if num >= den:
            return True
        if num <= 0:
            return False
        r = num
        i = 0
        while True:
            r <<= 1
            if r >= den:
                qb = 1
                r -= den
            else:
                qb = 0
            tb = self.bit(i)
            if tb != qb:
                return tb < qb
            i += 1
            if r == 0:
                # The threshold's expansion terminated; tau <= q now needs
                # every further digit of tau to be 0, a probability-0 event.
                while True:
                    if self.bit(i):
                        return False
                    i += 1


def lazy_compare(tau: LazyReal, q: Fraction | tuple[int, int]) -> bool:
    """Exact comparison tau <= q; returns LE (True) or GT (False)."""
    if isinstance(q, tuple):
        num, den = q
    else:
        num, den = q.numerator, q.denominator
    return tau.le(num, den)


def derive_trial_seed(master: int, index: int) -> int:
    """Per-trial 64-bit seed for independent repetitions under one master."""
    _check_u64("master seed", master)
    digest = hashlib.sha256(
        b"perfectcolor:trial:" + master.to_bytes(8, "big") + index.to_bytes(8, "big")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def parse_seed(text: str) -> int:
    """Parse a seed given as decimal or 0x-prefixed hex."""
    text = text.strip()
    value = int(text, 16) if text.lower().startswith("0x") else int(text)
    _check_u64("seed", value)
    return value
