"""Constant-word-operation planar point location over packed integer lanes."""

from wordloc.errors import (
    BuildError,
    CorruptIndexError,
    DegenerateInputError,
    InputError,
    LayoutError,
    OutOfRangeError,
    PackingError,
    WordlocError,
)
from wordloc.exact import locate_bruteforce, orient, point_in_triangle_exact
from wordloc.locator import (
    LocateResult,
    PackedEdgeIndex,
    QueryPoint,
    build,
    candidates,
    evaluate,
    locate,
)
from wordloc.quantizer import CutSpec, compute_cut_bit, error_budget, msb, quantize
from wordloc.subdivision import Subdivision, TriangulatedSubdivision, triangulate

__all__ = [
    "BuildError",
    "CorruptIndexError",
    "CutSpec",
    "DegenerateInputError",
    "InputError",
    "LayoutError",
    "LocateResult",
    "OutOfRangeError",
    "PackedEdgeIndex",
    "PackingError",
    "QueryPoint",
    "Subdivision",
    "TriangulatedSubdivision",
    "WordlocError",
    "build",
    "candidates",
    "compute_cut_bit",
    "error_budget",
    "evaluate",
    "locate",
    "locate_bruteforce",
    "msb",
    "orient",
    "point_in_triangle_exact",
    "quantize",
    "triangulate",
]
