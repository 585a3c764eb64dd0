"""Word-parallel arithmetic on fixed-width integer lanes.

A lane is ``L = magnitude_bits + 2`` bits wide: the magnitude field, a sign bit at
position ``L - 2`` and a guard bit at ``L - 1``. ``K = W // L`` lanes share a ``W``-bit
word, lane 0 in the least significant bits of word 0.

Packed values are stored as one Python int holding the lanes back to back (lane ``i``
at bit ``i * L``). Every operation here is lane-isolated, so no carry or borrow ever
leaves a lane, and an operation on that int is the same operation applied to each
word independently. ``words`` recovers the per-word view. When a :class:`WordOps`
counter is passed, each primitive charges one operation per word it touches.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from wordloc.errors import LayoutError, PackingError


@dataclass(frozen=True)
class LaneLayout:
    word_bits_W: int
    lane_bits_L: int
    lanes_per_word_K: int
    magnitude_bits: int

    @property
    def sign_bit(self) -> int:
        return self.lane_bits_L - 2

    @property
    def guard_bit(self) -> int:
        return self.lane_bits_L - 1

    def words_for(self, count: int) -> int:
        return -(-count // self.lanes_per_word_K)


def make_layout(magnitude_bits: int, word_bits: int = 64) -> LaneLayout:
    if magnitude_bits < 1:
        raise LayoutError(f"magnitude_bits must be >= 1, got {magnitude_bits}")
    lane = magnitude_bits + 2
    if lane > word_bits:
        raise LayoutError(
            f"a {lane}-bit lane ({magnitude_bits} magnitude bits) does not fit a {word_bits}-bit word"
        )
    return LaneLayout(word_bits, lane, word_bits // lane, magnitude_bits)


@dataclass(frozen=True)
class SwarConstants:
    C1: int
    C2: int


def make_constants(layout: LaneLayout) -> SwarConstants:
    """One-word constants: C1 has bit 0 of every lane set, C2 the sign bit of every lane."""
    c1 = 0
    for lane in range(layout.lanes_per_word_K):
        c1 |= 1 << (lane * layout.lane_bits_L)
    return SwarConstants(C1=c1, C2=c1 << layout.sign_bit)


@lru_cache(maxsize=256)
def lane_pattern(lane_bits: int, count: int, bit: int = 0) -> int:
    """``bit`` set in each of ``count`` consecutive lanes (C1 / C2 spread over a stream)."""
    if count == 0:
        return 0
    return (((1 << (count * lane_bits)) - 1) // ((1 << lane_bits) - 1)) << bit


class WordOps:
    """Instrumentation counter: number of single-word machine operations performed."""

    def __init__(self):
        self.count = 0

    def tick(self, nwords: int, ops: int = 1) -> None:
        self.count += nwords * ops

    def __repr__(self):
        return f"WordOps({self.count})"


def _tick(ops: WordOps | None, nwords: int, k: int = 1) -> None:
    if ops is not None:
        ops.count += nwords * k


@dataclass(frozen=True)
class _Packed:
    bits: int
    layout: LaneLayout
    count: int

    @property
    def nwords(self) -> int:
        return self.layout.words_for(self.count)

    @property
    def words(self) -> tuple[int, ...]:
        span = self.layout.lanes_per_word_K * self.layout.lane_bits_L
        mask = (1 << span) - 1
        return tuple((self.bits >> (w * span)) & mask for w in range(self.nwords))

    @classmethod
    def from_words(cls, words: Sequence[int], layout: LaneLayout, count: int):
        span = layout.lanes_per_word_K * layout.lane_bits_L
        if len(words) != layout.words_for(count):
            raise PackingError(f"{len(words)} words cannot hold exactly {count} lanes")
        bits = 0
        for w, word in enumerate(words):
            if word >> span:
                raise PackingError(f"word {w} has bits set outside its {layout.lanes_per_word_K} lanes")
            bits |= word << (w * span)
        if bits >> (count * layout.lane_bits_L):
            raise PackingError("bits set in unoccupied lanes")
        return cls(bits, layout, count)

    def lane(self, i: int) -> int:
        """Raw L-bit field of lane ``i``."""
        L = self.layout.lane_bits_L
        return (self.bits >> (i * L)) & ((1 << L) - 1)


class PackedMagnitudes(_Packed):
    """Nonnegative magnitudes, one per lane."""


class SignWord(_Packed):
    """Only the sign bit of each lane may be set; set means the lane is negative."""


class PackedSigned(_Packed):
    """Each lane holds an L-bit two's-complement value with |v| < 2**magnitude_bits."""


def pack(values: Sequence[int], layout: LaneLayout) -> tuple[PackedMagnitudes, SignWord]:
    L = layout.lane_bits_L
    limit = 1 << layout.magnitude_bits
    mags = 0
    signs = 0
    for i, v in enumerate(values):
        m = -v if v < 0 else v
        if m >= limit:
            raise PackingError(f"value {v} at index {i} needs more than {layout.magnitude_bits} bits")
        mags |= m << (i * L)
        if v < 0:
            signs |= 1 << (i * L + layout.sign_bit)
    n = len(values)
    return PackedMagnitudes(mags, layout, n), SignWord(signs, layout, n)


def unpack_magnitudes(p: PackedMagnitudes) -> list[int]:
    return [p.lane(i) for i in range(p.count)]


def unpack_signs(s: SignWord) -> list[bool]:
    bit = s.layout.sign_bit
    return [bool((s.lane(i) >> bit) & 1) for i in range(s.count)]


def unpack(p: PackedSigned) -> list[int]:
    L = p.layout.lane_bits_L
    half = 1 << (L - 1)
    out = []
    for i in range(p.count):
        v = p.lane(i)
        out.append(v - (1 << L) if v >= half else v)
    return out


def pack_signed(values: Sequence[int], layout: LaneLayout) -> PackedSigned:
    return to_twos_complement(*pack(values, layout))


def broadcast_multiply(
    mags: PackedMagnitudes, signs: SignWord, scalar: int, ops: WordOps | None = None
) -> tuple[PackedMagnitudes, SignWord]:
    """Multiply every lane by ``scalar`` with one multiply per word; signs combine by XOR.

    The caller guarantees ``|scalar| * max lane < 2**magnitude_bits``.
    """
    layout = mags.layout
    m = -scalar if scalar < 0 else scalar
    if m >> layout.magnitude_bits:
        raise PackingError(f"scalar {scalar} exceeds {layout.magnitude_bits} magnitude bits")
    n = mags.nwords
    product = mags.bits * m
    flip = lane_pattern(layout.lane_bits_L, mags.count, layout.sign_bit) if scalar < 0 else 0
    _tick(ops, n, 2)
    return PackedMagnitudes(product, layout, mags.count), SignWord(signs.bits ^ flip, layout, signs.count)


class ComplementSteps(NamedTuple):
    C: int
    D: int
    E: int
    F: int
    G: int


def complement_steps(mags: PackedMagnitudes, signs: SignWord) -> ComplementSteps:
    """Intermediate masks of the sign-magnitude to two's-complement conversion."""
    L = mags.layout.lane_bits_L
    A = mags.bits
    B = signs.bits
    C = B >> (L - 2)  # sign moved to bit 0 of its lane
    D = B - C  # all ones below the sign bit of each negative lane
    E = A & D  # magnitudes of the negative lanes
    F = (B << 1) - E  # their complements, within L - 1 bits
    G = A - E  # nonnegative lanes untouched
    return ComplementSteps(C, D, E, F, G)


def to_twos_complement(
    mags: PackedMagnitudes, signs: SignWord, ops: WordOps | None = None
) -> PackedSigned:
    """Sign-magnitude lanes to two's complement through masks built from the sign word."""
    L = mags.layout.lane_bits_L
    st = complement_steps(mags, signs)
    R = st.F | st.G
    # widen the (L-1)-bit form to the full lane: copy the sign into the guard bit;
    # a negative zero leaves 2**(L-1) in F, which the low mask clears
    high = lane_pattern(L, mags.count, L - 1)
    low = high - (high >> (L - 1))
    R = (R & low) | ((R & (high >> 1)) << 1)
    _tick(ops, mags.nwords, 11)
    return PackedSigned(R, mags.layout, mags.count)


def lanewise_add(a: PackedSigned, b: PackedSigned, ops: WordOps | None = None) -> PackedSigned:
    """Per-lane sum modulo 2**L; the guard bit is added separately so no carry crosses lanes."""
    layout = a.layout
    count = max(a.count, b.count)
    L = layout.lane_bits_L
    high = lane_pattern(L, count, L - 1)
    low = lane_pattern(L, count, 0) * ((1 << (L - 1)) - 1)
    s = ((a.bits & low) + (b.bits & low)) ^ ((a.bits ^ b.bits) & high)
    _tick(ops, layout.words_for(count), 6)
    return PackedSigned(s, layout, count)


def compress(spread: int, lane_bits: int, count: int, bit: int) -> int:
    """Gather bit ``bit`` of each of ``count`` lanes into a dense mask (PEXT per word)."""
    if count <= 48:
        dense = 0
        for i in range(count):
            dense |= ((spread >> (i * lane_bits + bit)) & 1) << i
        return dense
    nbytes = (count * lane_bits + 7) // 8
    raw = np.frombuffer(spread.to_bytes(nbytes, "little"), dtype=np.uint8)
    picked = np.unpackbits(raw, bitorder="little")[bit::lane_bits][:count]
    return int.from_bytes(np.packbits(picked, bitorder="little").tobytes(), "little")


def sign_bits_spread(p: PackedSigned, ops: WordOps | None = None) -> int:
    _tick(ops, p.nwords)
    return p.bits & lane_pattern(p.layout.lane_bits_L, p.count, p.layout.sign_bit)


def extract_sign_bits(p: PackedSigned, ops: WordOps | None = None) -> int:
    """Dense mask: bit i set iff lane i is negative."""
    spread = sign_bits_spread(p, ops)
    _tick(ops, p.nwords)
    return compress(spread, p.layout.lane_bits_L, p.count, p.layout.sign_bit)


def zero_lanes_spread(p: PackedSigned, ops: WordOps | None = None) -> int:
    L = p.layout.lane_bits_L
    high = lane_pattern(L, p.count, L - 1)
    c1 = lane_pattern(L, p.count, 0)
    low = high - c1
    nonzero = (((p.bits & low) + low) | p.bits) & high
    _tick(ops, p.nwords, 5)
    return nonzero ^ high


def find_zero_lanes(p: PackedSigned, ops: WordOps | None = None) -> int:
    """Dense mask: bit i set iff lane i is exactly zero."""
    spread = zero_lanes_spread(p, ops)
    _tick(ops, p.nwords)
    return compress(spread, p.layout.lane_bits_L, p.count, p.layout.guard_bit)
