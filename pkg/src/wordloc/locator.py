"""Packed edge index and point-location queries.

Every triangle contributes three lanes (3t, 3t+1, 3t+2) holding its inside-positive
edge functions. A query is quantized with the build's cut, multiplied into the a and b
coefficient streams, added to the c stream, and the sign and zero bits of every lane
are read off. Triangles with no negative lane are candidates; each candidate is then
confirmed against the original real coordinates.

Besides the exact evaluation, the index keeps a per-lane slack stream: a lane whose
value plus slack is still negative is outside its triangle even after accounting for
the truncation of the query and of the vertices. Locating with exact confirmation
filters on that conservative mask, so the true triangle is never dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from wordloc import swar
from wordloc.errors import BuildError, InputError
from wordloc.exact import classify_triangle
from wordloc.quantizer import CutSpec, error_budget, quantize
from wordloc.result import OUTSIDE, Kind, LocateResult
from wordloc.subdivision import Subdivision, TriangulatedSubdivision, edge_coefficients, triangulate
from wordloc.swar import (
    LaneLayout,
    PackedMagnitudes,
    PackedSigned,
    SignWord,
    SwarConstants,
    WordOps,
)


@dataclass(frozen=True)
class PackedEdgeIndex:
    layout: LaneLayout
    constants: SwarConstants
    cut: CutSpec
    a_mags: PackedMagnitudes
    a_signs: SignWord
    b_mags: PackedMagnitudes
    b_signs: SignWord
    c: PackedSigned
    slack: PackedSigned
    geometry: TriangulatedSubdivision
    error_budget: float

    @property
    def stream_a(self) -> tuple[PackedMagnitudes, SignWord]:
        return self.a_mags, self.a_signs

    @property
    def stream_b(self) -> tuple[PackedMagnitudes, SignWord]:
        return self.b_mags, self.b_signs

    @property
    def stream_c(self) -> PackedSigned:
        return self.c

    @property
    def n_triangles(self) -> int:
        return len(self.geometry.triangles)

    @property
    def n_lanes(self) -> int:
        return 3 * self.n_triangles

    @property
    def words_per_stream(self) -> int:
        return self.layout.words_for(self.n_lanes)

    def lane_map(self, lane: int) -> tuple[int, int]:
        """Lane index to (triangle, edge slot)."""
        if not 0 <= lane < self.n_lanes:
            raise IndexError(lane)
        return divmod(lane, 3)

    @cached_property
    def _group_leads(self) -> int:
        # bit 3t for every triangle t
        return swar.lane_pattern(3, self.n_triangles, 0)


@dataclass(frozen=True)
class QueryPoint:
    x0: float
    y0: float
    x1: int
    y1: int


@dataclass(frozen=True)
class EdgeMasks:
    """Dense per-lane masks from one evaluation.

    ``neg``: lane value < 0. ``zero``: lane value == 0. ``excluded``: lane value plus
    its slack < 0, i.e. the real query is certainly outside that triangle.
    """

    neg: int
    zero: int
    excluded: int


def _lane_slack(e, extent_x: int, extent_y: int) -> int:
    # bounds |quantized - real| edge evaluation, in quantized units, for any query
    # inside the real triangle (vertex and query truncation each move < 1 per axis)
    return 2 * (abs(e.a) + abs(e.b) + extent_x + extent_y) + 24


def pack_streams(t: TriangulatedSubdivision, layout: LaneLayout):
    """Pack the a, b, c and slack lanes of every triangle edge, checking all widths."""
    B = t.cut.width_B
    a_vals, b_vals, c_vals, slack_vals = [], [], [], []
    limit = 1 << layout.magnitude_bits
    for tri in range(len(t.triangles)):
        pts = [t.quantized[i] for i in t.triangles[tri]]
        ext_x = max(p[0] for p in pts) - min(p[0] for p in pts)
        ext_y = max(p[1] for p in pts) - min(p[1] for p in pts)
        for e in edge_coefficients(t, tri):
            if abs(e.a) >> (B + 1) or abs(e.b) >> (B + 1) or abs(e.c) >> (2 * B + 2):
                raise BuildError(f"edge {e} exceeds the coefficient widths for B = {B}")
            slack = _lane_slack(e, ext_x, ext_y)
            worst = (abs(e.a) + abs(e.b)) * ((1 << B) - 1) + abs(e.c) + slack
            if worst >= limit:
                raise BuildError(
                    f"edge {e} can evaluate to {worst}, beyond {layout.magnitude_bits} magnitude bits"
                )
            a_vals.append(e.a)
            b_vals.append(e.b)
            c_vals.append(e.c)
            slack_vals.append(slack)
    a = swar.pack(a_vals, layout)
    b = swar.pack(b_vals, layout)
    c = swar.pack_signed(c_vals, layout)
    slack = swar.pack_signed(slack_vals, layout)
    return a, b, c, slack


def index_from_geometry(t: TriangulatedSubdivision, word_bits: int = 64, budget: float | None = None) -> PackedEdgeIndex:
    layout = swar.make_layout(2 * t.cut.width_B + 4, word_bits)
    (a_mags, a_signs), (b_mags, b_signs), c, slack = pack_streams(t, layout)
    if budget is None:
        budget = error_budget(t.cut, t.coeff_bound())
    return PackedEdgeIndex(
        layout=layout,
        constants=swar.make_constants(layout),
        cut=t.cut,
        a_mags=a_mags,
        a_signs=a_signs,
        b_mags=b_mags,
        b_signs=b_signs,
        c=c,
        slack=slack,
        geometry=t,
        error_budget=budget,
    )


def build(s: Subdivision, word_bits: int = 64) -> PackedEdgeIndex:
    """Quantize, triangulate and pack a subdivision into an edge index."""
    return index_from_geometry(triangulate(s), word_bits)


def in_range(idx: PackedEdgeIndex, x, y) -> bool:
    x_lo, y_lo, x_hi, y_hi = idx.geometry.bbox
    return x_lo <= x <= x_hi and y_lo <= y <= y_hi


def make_query(idx: PackedEdgeIndex, x, y) -> QueryPoint:
    """Quantize a query inside the subdivision's bounding box."""
    return QueryPoint(x, y, quantize(x, idx.cut), quantize(y, idx.cut))


def evaluate(idx: PackedEdgeIndex, q: QueryPoint, ops: WordOps | None = None) -> EdgeMasks:
    """Evaluate a*x1 + b*y1 + c on every lane with a fixed sequence of word operations."""
    ax = swar.to_twos_complement(*swar.broadcast_multiply(idx.a_mags, idx.a_signs, q.x1, ops), ops)
    by = swar.to_twos_complement(*swar.broadcast_multiply(idx.b_mags, idx.b_signs, q.y1, ops), ops)
    s = swar.lanewise_add(swar.lanewise_add(ax, by, ops), idx.c, ops)
    widened = swar.lanewise_add(s, idx.slack, ops)
    return EdgeMasks(
        neg=swar.extract_sign_bits(s, ops),
        zero=swar.find_zero_lanes(s, ops),
        excluded=swar.extract_sign_bits(widened, ops),
    )


def candidates(
    idx: PackedEdgeIndex, masks: EdgeMasks, *, conservative: bool = False
) -> list[tuple[int, tuple[int, ...]]]:
    """Triangles none of whose three lanes is negative, with their zero-valued slots.

    With ``conservative`` the ``excluded`` mask is used instead of ``neg``, which keeps
    every triangle that could contain the real query.
    """
    neg = masks.excluded if conservative else masks.neg
    hit = neg | (neg >> 1) | (neg >> 2)
    free = idx._group_leads & ~hit
    out = []
    while free:
        low = free & -free
        lane = low.bit_length() - 1
        free ^= low
        z = (masks.zero >> lane) & 7
        out.append((lane // 3, tuple(s for s in range(3) if (z >> s) & 1)))
    return out


def locate(idx: PackedEdgeIndex, x0, y0, *, fallback: bool = True) -> LocateResult:
    """Locate (x0, y0); with ``fallback`` every candidate is confirmed exactly."""
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise InputError(f"non-finite query ({x0!r}, {y0!r})")
    if not in_range(idx, x0, y0):
        return OUTSIDE
    masks = evaluate(idx, make_query(idx, x0, y0))
    if fallback:
        for tri, _ in candidates(idx, masks, conservative=True):
            r = classify_triangle(idx.geometry, tri, x0, y0)
            if r.kind is not Kind.OUTSIDE:
                return r
        return OUTSIDE
    found = candidates(idx, masks)
    if not found:
        return OUTSIDE
    tri, slots = found[0]
    face = idx.geometry.face_of_triangle[tri]
    if slots:
        return LocateResult(Kind.ON_EDGE, tri, face, slots[0], exact_confirmed=False)
    return LocateResult(Kind.INSIDE, tri, face, None, exact_confirmed=False)


def evaluate_op_count(idx: PackedEdgeIndex, x0, y0) -> int:
    ops = WordOps()
    evaluate(idx, make_query(idx, x0, y0), ops)
    return ops.count
