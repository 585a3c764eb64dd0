"""Seeded random subdivisions and the locator-vs-oracle benchmark.

Subdivisions are Delaunay triangulations of distinct random points on a dyadic lattice
(spacing 1/8, centred on the origin so both signs occur). A random subset of adjacent
triangle pairs whose union is strictly convex is merged into quadrilateral faces, so
faces are re-triangulated by the build and face ids differ from triangle ids.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from wordloc.exact import locate_bruteforce, orient
from wordloc.locator import PackedEdgeIndex, build, evaluate_op_count, in_range, locate
from wordloc.subdivision import Subdivision

LATTICE_STEP = 0.125


def _grid_for(n: int) -> int:
    return max(32, 4 * int(np.ceil(np.sqrt(n))))


def random_subdivision(n: int, seed: int, *, merge_fraction: float = 0.3, grid: int | None = None) -> Subdivision:
    if n < 3:
        raise ValueError("need at least 3 points")
    grid = grid or _grid_for(n)
    for attempt in range(100):
        rng = np.random.default_rng([seed, attempt])
        cells = rng.choice(grid * grid, size=n, replace=False)
        ij = np.stack([cells % grid, cells // grid], axis=1)
        pts = [(int(i) - grid // 2, int(j) - grid // 2) for i, j in ij]
        try:
            tri = Delaunay(np.asarray(pts, dtype=float))
        except QhullError:
            continue
        faces = _faces_from(tri, pts, rng, merge_fraction)
        if faces:
            verts = tuple((i * LATTICE_STEP, j * LATTICE_STEP) for i, j in pts)
            return Subdivision(verts, tuple(faces))
    raise RuntimeError(f"could not draw a non-degenerate point set for n={n}, seed={seed}")


def _faces_from(tri: Delaunay, pts, rng, merge_fraction: float) -> list[tuple[int, ...]]:
    simplices = []
    for s in tri.simplices:
        a, b, c = (int(v) for v in s)
        o = orient(*pts[a], *pts[b], *pts[c])
        if o < 0:
            b, c = c, b
        if o != 0:
            simplices.append((a, b, c))
    edge_owner = {}
    for k, (a, b, c) in enumerate(simplices):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_owner[(u, v)] = k
    used = [False] * len(simplices)
    faces = []
    for k in rng.permutation(len(simplices)):
        k = int(k)
        if used[k]:
            continue
        used[k] = True
        a, b, c = simplices[k]
        face = (a, b, c)
        if rng.random() < merge_fraction:
            for rot in range(3):
                u, v, w = face[rot:] + face[:rot]
                other = edge_owner.get((v, u))
                if other is None or used[other]:
                    continue
                x = next(p for p in simplices[other] if p not in (u, v))
                quad = (u, x, v, w)
                if all(orient(*pts[quad[i - 1]], *pts[quad[i]], *pts[quad[(i + 1) % 4]]) > 0 for i in range(4)):
                    used[other] = True
                    face = quad
                    break
        faces.append(face)
    return faces


def random_queries(sub: Subdivision, count: int, seed: int, margin: float = 0.1) -> list[tuple[float, float]]:
    """Uniform queries over the vertex bounding box grown by ``margin`` of its size."""
    xs = [x for x, _ in sub.vertices]
    ys = [y for _, y in sub.vertices]
    x_lo, x_hi, y_lo, y_hi = min(xs), max(xs), min(ys), max(ys)
    dx, dy = (x_hi - x_lo) * margin / 2, (y_hi - y_lo) * margin / 2
    rng = np.random.default_rng([seed, 0x51])
    qx = rng.uniform(x_lo - dx, x_hi + dx, count)
    qy = rng.uniform(y_lo - dy, y_hi + dy, count)
    return [(float(x), float(y)) for x, y in zip(qx, qy)]


def edge_line_distances(idx: PackedEdgeIndex, x: float, y: float) -> np.ndarray:
    """Distance from (x, y) to the line of every triangle edge (lane order), in floats."""
    v = idx.geometry.real_triangle_array
    ax, ay = v[:, :, 0], v[:, :, 1]
    bx, by = np.roll(ax, -1, axis=1), np.roll(ay, -1, axis=1)
    s = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
    return (np.abs(s) / np.hypot(bx - ax, by - ay)).ravel()


def far_from_edges(idx: PackedEdgeIndex, x: float, y: float) -> bool:
    return bool(edge_line_distances(idx, x, y).min() > idx.error_budget * (1 + 1e-9))


@dataclass
class BenchRecord:
    n: int
    T: int
    words_per_stream: int
    word_ops_per_query: int
    queries_per_second: float | None
    oracle_mismatch_count: int
    op_count_varies: bool = False
    skipped_near_edge: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class Mismatch:
    seed: int
    n: int
    query: tuple[float, float]
    got: str
    want: str

    def reproduction(self) -> str:
        return (
            f"mismatch: seed={self.seed} n={self.n} query=({self.query[0]!r}, {self.query[1]!r}) "
            f"locate={self.got!r} oracle={self.want!r}"
        )


def run_size(
    n: int, queries: int, seed: int, *, word_bits: int = 64, fallback: bool = True, timing: bool = True
) -> tuple[BenchRecord, Mismatch | None]:
    sub = random_subdivision(n, seed)
    idx = build(sub, word_bits)
    qs = random_queries(sub, queries, seed)
    t0 = time.perf_counter()
    results = [locate(idx, x, y, fallback=fallback) for x, y in qs]
    elapsed = time.perf_counter() - t0
    op_counts = {evaluate_op_count(idx, x, y) for x, y in qs if in_range(idx, x, y)}
    mismatches = 0
    skipped = 0
    first = None
    for (x, y), got in zip(qs, results):
        if not fallback and not far_from_edges(idx, x, y):
            skipped += 1
            continue
        want = locate_bruteforce(idx.geometry, x, y)
        if not got.same_location(want):
            mismatches += 1
            if first is None:
                first = Mismatch(seed, n, (x, y), got.to_line(), want.to_line())
    record = BenchRecord(
        n=n,
        T=idx.n_triangles,
        words_per_stream=idx.words_per_stream,
        word_ops_per_query=max(op_counts, default=0),
        queries_per_second=(round(queries / elapsed, 1) if elapsed > 0 else None) if timing else None,
        oracle_mismatch_count=mismatches,
        op_count_varies=len(op_counts) > 1,
        skipped_near_edge=skipped,
    )
    return record, first
