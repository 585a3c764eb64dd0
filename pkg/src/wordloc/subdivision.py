"""Planar subdivisions, their triangulation, and integer edge functions.

Faces are simple polygons given as vertex-index cycles. Triangulation runs on the
quantized coordinates, so every triangle is counterclockwise with nonzero area in
exact integer arithmetic and its edge functions have exact integer coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from wordloc.errors import DegenerateInputError, InputError
from wordloc.exact import orient
from wordloc.quantizer import CutSpec, compute_cut_bit, quantize, refine

Point = tuple[float, float]


class QuantizedDegeneracy(DegenerateInputError):
    """Geometry that is valid in the reals but collapses at the current cut."""


@dataclass(frozen=True)
class Subdivision:
    vertices: tuple[Point, ...]
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices))
        object.__setattr__(self, "faces", tuple(tuple(int(i) for i in f) for f in self.faces))
        n = len(self.vertices)
        for i, (x, y) in enumerate(self.vertices):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InputError(f"vertex {i} has a non-finite coordinate ({x!r}, {y!r})")
        for f, face in enumerate(self.faces):
            if len(face) < 3:
                raise InputError(f"face {f} has {len(face)} vertices; at least 3 are needed")
            if len(set(face)) != len(face):
                raise InputError(f"face {f} repeats a vertex")
            for i in face:
                if not 0 <= i < n:
                    raise InputError(f"face {f} refers to vertex {i}, but there are {n} vertices")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def coordinates(self) -> list[float]:
        return [c for v in self.vertices for c in v]


@dataclass(frozen=True)
class EdgeCoeffs:
    """Edge function a*x + b*y + c, positive inside the triangle."""

    a: int
    b: int
    c: int
    triangle: int
    edge_slot: int

    def __call__(self, x: int, y: int) -> int:
        return self.a * x + self.b * y + self.c


@dataclass(frozen=True)
class TriangulatedSubdivision:
    vertices: tuple[Point, ...]
    quantized: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    face_of_triangle: tuple[int, ...]
    cut: CutSpec
    n_faces: int = 0

    def real_triangle(self, t: int) -> tuple[Point, Point, Point]:
        i, j, k = self.triangles[t]
        v = self.vertices
        return v[i], v[j], v[k]

    @cached_property
    def real_triangle_array(self) -> np.ndarray:
        """(T, 3, 2) float array of triangle corners, for vectorized filtering."""
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        idx = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        return v[idx]

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [x for x, _ in self.vertices]
        ys = [y for _, y in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def coeff_bound(self) -> float:
        """max |a|, |b| over all edge lines, in original units."""
        best = 0.0
        for t in range(len(self.triangles)):
            p = self.real_triangle(t)
            for j in range(3):
                (x0, y0), (x1, y1) = p[j], p[(j + 1) % 3]
                best = max(best, abs(x1 - x0), abs(y1 - y0))
        return best


def signed_area2(ring: Sequence[int], pts) -> int:
    s = 0
    for a, b in zip(ring, list(ring[1:]) + [ring[0]]):
        s += pts[a][0] * pts[b][1] - pts[b][0] * pts[a][1]
    return s


def _on_segment(p, a, b) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _segments_touch(a, b, c, d) -> bool:
    o1 = orient(*a, *b, *c)
    o2 = orient(*a, *b, *d)
    o3 = orient(*c, *d, *a)
    o4 = orient(*c, *d, *b)
    if o1 != o2 and o3 != o4 and o1 and o2 and o3 and o4:
        return True
    return (
        (o1 == 0 and _on_segment(c, a, b))
        or (o2 == 0 and _on_segment(d, a, b))
        or (o3 == 0 and _on_segment(a, c, d))
        or (o4 == 0 and _on_segment(b, c, d))
    )


def find_self_intersection(ring: Sequence[int], pts) -> tuple[int, int] | None:
    """First pair of edge positions that touch improperly, or None for a simple ring."""
    k = len(ring)
    edges = [(pts[ring[i]], pts[ring[(i + 1) % k]]) for i in range(k)]
    boxes = [
        (min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1])) for a, b in edges
    ]
    for i in range(k):
        a, b = edges[i]
        if a == b:
            return i, i
        # adjacent edge folding back along itself
        c = edges[(i + 1) % k][1]
        if orient(*a, *b, *c) == 0 and (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) < 0:
            return i, (i + 1) % k
    if k == 3:
        return None
    for i in range(k):
        bi = boxes[i]
        for j in range(i + 2, k):
            if i == 0 and j == k - 1:
                continue
            bj = boxes[j]
            if bi[0] > bj[2] or bj[0] > bi[2] or bi[1] > bj[3] or bj[1] > bi[3]:
                continue
            if _segments_touch(*edges[i], *edges[j]):
                return i, j
    return None


def _in_closed_triangle(p, a, b, c) -> bool:
    return orient(*a, *b, *p) >= 0 and orient(*b, *c, *p) >= 0 and orient(*c, *a, *p) >= 0


def _split_diagonal(ring: list[int], pts) -> tuple[int, int] | None:
    """A diagonal from a strictly convex vertex to the deepest vertex inside its ear."""
    k = len(ring)
    for pos in range(k):
        u, v, w = ring[pos - 1], ring[pos], ring[(pos + 1) % k]
        if orient(*pts[u], *pts[v], *pts[w]) <= 0:
            continue
        best, depth = None, None
        for q in range(k):
            p = ring[q]
            if p in (u, v, w) or not _in_closed_triangle(pts[p], pts[u], pts[v], pts[w]):
                continue
            d = (pts[w][0] - pts[u][0]) * (pts[p][1] - pts[u][1]) - (pts[w][1] - pts[u][1]) * (pts[p][0] - pts[u][0])
            if depth is None or d < depth:
                best, depth = q, d
        if best is not None:
            return pos, best
    return None


def triangulate_polygon(ring: Sequence[int], pts) -> list[tuple[int, int, int]]:
    """Ear clipping of a simple CCW polygon with exact predicates.

    Collinear and reflex vertices are never clipped. If no ear exists (only possible
    with collinear vertices), the ring is split along a diagonal and both halves are
    triangulated separately.
    """
    ring = list(ring)
    k = len(ring)
    if k == 3:
        a, b, c = ring
        if orient(*pts[a], *pts[b], *pts[c]) <= 0:
            raise QuantizedDegeneracy(f"triangle {tuple(ring)} has no area after quantization")
        return [(a, b, c)]
    prev = [(i - 1) % k for i in range(k)]
    nxt = [(i + 1) % k for i in range(k)]
    alive = k

    def is_ear(i: int) -> bool:
        a, c = prev[i], nxt[i]
        pa, pi, pc = pts[ring[a]], pts[ring[i]], pts[ring[c]]
        if orient(*pa, *pi, *pc) <= 0:
            return False
        j = nxt[c]
        while j != a:
            if _in_closed_triangle(pts[ring[j]], pa, pi, pc):
                return False
            j = nxt[j]
        return True

    ear = [is_ear(i) for i in range(k)]
    out = []
    i = 1 % k
    stall = 0
    while alive > 3:
        if ear[i]:
            a, c = prev[i], nxt[i]
            out.append((ring[a], ring[i], ring[c]))
            nxt[a], prev[c] = c, a
            alive -= 1
            ear[a] = is_ear(a)
            ear[c] = is_ear(c)
            i = c
            stall = 0
            continue
        i = nxt[i]
        stall += 1
        if stall > alive:
            rest = [ring[i]]
            j = nxt[i]
            while j != i:
                rest.append(ring[j])
                j = nxt[j]
            split = _split_diagonal(rest, pts)
            if split is None:
                raise QuantizedDegeneracy(f"no ear or diagonal in polygon {rest}")
            p, q = sorted(split)
            return out + triangulate_polygon(rest[p : q + 1], pts) + triangulate_polygon(rest[q:] + rest[: p + 1], pts)
    a, c = prev[i], nxt[i]
    tri = (ring[a], ring[i], ring[c])
    if orient(*pts[tri[0]], *pts[tri[1]], *pts[tri[2]]) <= 0:
        raise QuantizedDegeneracy(f"triangle {tri} has no area after quantization")
    out.append(tri)
    return out


def _triangulate_at(s: Subdivision, cut: CutSpec) -> TriangulatedSubdivision:
    q = tuple((quantize(x, cut), quantize(y, cut)) for x, y in s.vertices)
    triangles: list[tuple[int, int, int]] = []
    faces: list[int] = []
    for f, face in enumerate(s.faces):
        ring = list(face)
        area = signed_area2(ring, q)
        if area == 0:
            exact = [(Fraction(x), Fraction(y)) for x, y in s.vertices]
            if signed_area2(ring, exact) == 0:
                raise DegenerateInputError(f"face {f} has zero area")
            raise QuantizedDegeneracy(f"face {f} loses its area after quantization")
        if area < 0:
            ring.reverse()
        hit = find_self_intersection(ring, q)
        if hit is not None:
            if find_self_intersection(ring, s.vertices) is not None:
                raise InputError(f"face {f} is not a simple polygon (edges {hit[0]} and {hit[1]} meet)")
            raise QuantizedDegeneracy(f"face {f} self-intersects after quantization")
        for tri in triangulate_polygon(ring, q):
            i, j, k = tri
            v = s.vertices
            if orient(*v[i], *v[j], *v[k]) <= 0:
                raise QuantizedDegeneracy(f"triangle {tri} of face {f} is not counterclockwise in real coordinates")
            triangles.append(tri)
            faces.append(f)
    return TriangulatedSubdivision(
        vertices=s.vertices,
        quantized=q,
        triangles=tuple(triangles),
        face_of_triangle=tuple(faces),
        cut=cut,
        n_faces=len(s.faces),
    )


def triangulate(s: Subdivision, cut: CutSpec | None = None) -> TriangulatedSubdivision:
    """Quantize, then triangulate every face; one retry two bits finer on collapse."""
    if not s.faces:
        raise InputError("subdivision has no faces")
    coords = s.coordinates()
    if cut is None:
        cut = compute_cut_bit(coords)
    try:
        return _triangulate_at(s, cut)
    except QuantizedDegeneracy as first:
        finer = refine(cut, coords, 2)
        try:
            return _triangulate_at(s, finer)
        except QuantizedDegeneracy as second:
            raise DegenerateInputError(
                f"{second} (also at cut bit {cut.cut_bit}: {first}); the input needs a finer cut"
            ) from second


def edge_coefficients(t: TriangulatedSubdivision, tri: int) -> tuple[EdgeCoeffs, EdgeCoeffs, EdgeCoeffs]:
    ids = t.triangles[tri]
    p = [t.quantized[i] for i in ids]
    (x0, y0), (x1, y1), (x2, y2) = p
    if (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0) == 0:
        raise DegenerateInputError(f"triangle {tri} has zero area")
    out = []
    for slot in range(3):
        (xj, yj), (xk, yk) = p[slot], p[(slot + 1) % 3]
        out.append(EdgeCoeffs(yj - yk, xk - xj, xj * yk - xk * yj, tri, slot))
    return tuple(out)
