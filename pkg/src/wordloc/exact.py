"""Error-free orientation predicates on the original real coordinates.

Inputs are machine floats (or ints), i.e. exact dyadic rationals. ``orient`` first
evaluates the determinant in floating point and accepts its sign when it clears a
static forward error bound; otherwise it recomputes with exact rationals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from wordloc.errors import DegenerateInputError, InputError
from wordloc.result import OUTSIDE, Kind, LocateResult

if TYPE_CHECKING:
    from wordloc.subdivision import TriangulatedSubdivision

_EPS = 2.0**-53
# Shewchuk's ccwerrboundA
_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
# below this the products may have lost bits to underflow
_TINY = 1e-150
_FAST_TYPES = (float, int, np.float64)


def orient_exact(px, py, qx, qy, rx, ry) -> int:
    px, py, qx, qy, rx, ry = map(Fraction, (px, py, qx, qy, rx, ry))
    det = (qx - px) * (ry - py) - (qy - py) * (rx - px)
    return (det > 0) - (det < 0)


def orient(px, py, qx, qy, rx, ry) -> int:
    """Sign of (q - p) x (r - p): +1 counterclockwise, 0 collinear, -1 clockwise."""
    args = (px, py, qx, qy, rx, ry)
    if not all(type(v) in _FAST_TYPES for v in args):
        # rationals mixed with floats would silently round to float
        return orient_exact(*args)
    try:
        left = (qx - px) * (ry - py)
        right = (qy - py) * (rx - px)
    except OverflowError:
        return orient_exact(px, py, qx, qy, rx, ry)
    det = left - right
    detsum = abs(left) + abs(right)
    if isinstance(det, float):
        if math.isfinite(det) and detsum > _TINY and abs(det) > _ERRBOUND * detsum:
            return 1 if det > 0 else -1
        return orient_exact(px, py, qx, qy, rx, ry)
    if isinstance(det, int):
        return (det > 0) - (det < 0)
    return orient_exact(px, py, qx, qy, rx, ry)


def point_in_triangle_exact(q, tri, *, checked: bool = True) -> tuple[Kind, int | None]:
    """Classify ``q`` against the CCW triangle ``tri`` (three (x, y) points).

    Returns ``(Kind.INSIDE, None)``, ``(Kind.ON_EDGE, slot)`` with the lowest slot whose
    edge contains ``q`` (slot j runs from vertex j to vertex j+1), or ``(Kind.OUTSIDE, None)``.
    """
    (x0, y0), (x1, y1), (x2, y2) = tri
    qx, qy = q
    if checked:
        o = orient(x0, y0, x1, y1, x2, y2)
        if o == 0:
            raise DegenerateInputError(f"collinear triangle {tri!r}")
        if o < 0:
            raise InputError(f"triangle {tri!r} is clockwise")
    zero_slot = None
    for slot, (ax, ay, bx, by) in enumerate(((x0, y0, x1, y1), (x1, y1, x2, y2), (x2, y2, x0, y0))):
        s = orient(ax, ay, bx, by, qx, qy)
        if s < 0:
            return Kind.OUTSIDE, None
        if s == 0 and zero_slot is None:
            zero_slot = slot
    if zero_slot is None:
        return Kind.INSIDE, None
    return Kind.ON_EDGE, zero_slot


def classify_triangle(t: TriangulatedSubdivision, tri: int, x, y) -> LocateResult:
    kind, slot = point_in_triangle_exact((x, y), t.real_triangle(tri), checked=False)
    if kind is Kind.OUTSIDE:
        return OUTSIDE
    return LocateResult(kind, tri, t.face_of_triangle[tri], slot, exact_confirmed=True)


def possibly_containing(t: TriangulatedSubdivision, x: float, y: float) -> np.ndarray:
    """Indices of triangles that a float filter cannot rule out, in increasing order.

    A triangle is ruled out only when one of its edge determinants is negative by more
    than the rounding error bound, which the exact predicate would confirm.
    """
    v = t.real_triangle_array
    if v.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    ax, ay = v[:, :, 0], v[:, :, 1]
    bx, by = np.roll(ax, -1, axis=1), np.roll(ay, -1, axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        left = (bx - ax) * (y - ay)
        right = (by - ay) * (x - ax)
        det = left - right
        bound = _ERRBOUND * (np.abs(left) + np.abs(right))
        surely_negative = (det < -bound) & np.isfinite(det) & (bound > _TINY * _ERRBOUND)
    return np.flatnonzero(~surely_negative.any(axis=1))


def locate_bruteforce(t: TriangulatedSubdivision, x, y) -> LocateResult:
    """Ground truth: the lowest-index triangle whose closed real region contains (x, y)."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InputError(f"non-finite query ({x!r}, {y!r})")
    for tri in possibly_containing(t, float(x), float(y)):
        r = classify_triangle(t, int(tri), x, y)
        if r.kind is not Kind.OUTSIDE:
            return r
    return OUTSIDE


def locate_scan(t: TriangulatedSubdivision, x, y) -> LocateResult:
    """Unfiltered linear scan; same answers as :func:`locate_bruteforce`, only slower."""
    for tri in range(len(t.triangles)):
        r = classify_triangle(t, tri, x, y)
        if r.kind is not Kind.OUTSIDE:
            return r
    return OUTSIDE
