"""Exit criteria, one test each; every outcome is recorded for the terminal summary."""

import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from wordloc import swar
from wordloc.bench import edge_line_distances, random_queries, random_subdivision
from wordloc.exact import locate_bruteforce
from wordloc.io import dumps, format_subdivision, loads, parse_subdivision
from wordloc.locator import build, evaluate, evaluate_op_count, in_range, locate, make_query
from wordloc.quantizer import compute_cut_bit, quantize
from wordloc.result import Kind
from wordloc.subdivision import Subdivision

pytestmark = pytest.mark.acceptance


def record(name, ok, detail):
    ACCEPTANCE[name] = (bool(ok), detail)
    assert ok, f"{name}: {detail}"


def test_1_worked_example():
    lay = swar.make_layout(12, 64)  # 14-bit lanes as in the example
    a_mags, a_signs = swar.pack([1, 2, -5], lay)
    m, s = swar.broadcast_multiply(a_mags, a_signs, 10)
    lanes = swar.unpack_magnitudes(m)
    signs = swar.unpack_signs(s)
    ax = swar.to_twos_complement(m, s)
    # b*15 + c with b = (2, 4, 6), c = (0, -3, 7)
    by = swar.to_twos_complement(*swar.broadcast_multiply(*swar.pack([2, 4, 6], lay), 15))
    total = swar.lanewise_add(swar.lanewise_add(ax, by), swar.pack_signed([0, -3, 7], lay))
    values = swar.unpack(total)
    scalar = [a * 10 + b * 15 + c for a, b, c in zip([1, 2, -5], [2, 4, 6], [0, -3, 7])]
    neg = swar.extract_sign_bits(total)
    ok = (
        lanes == [10, 20, 50]
        and signs == [False, False, True]
        and swar.unpack(ax) == [10, 20, -50]
        and values == scalar == [40, 77, 47]
        and neg == 0
    )
    record("1. worked example", ok, f"lanes={lanes} signs={signs} values={values} neg_mask={neg:#b}")


def _swar_trials(rng, lay, trials):
    """Return a mismatch count per operation over ``trials`` random vectors."""
    mb = lay.magnitude_bits
    K = lay.lanes_per_word_K
    bad = dict.fromkeys(["pack/unpack", "broadcast_multiply", "to_twos_complement", "lanewise_add", "extract_sign_bits", "find_zero_lanes"], 0)
    top = (1 << mb) - 1
    for _ in range(trials):
        n = rng.randint(1, 3 * K)
        vals = [rng.choice((0, rng.randint(-top, top))) for _ in range(n)]
        m, s = swar.pack(vals, lay)
        bad["pack/unpack"] += swar.unpack_magnitudes(m) != [abs(v) for v in vals] or swar.unpack_signs(s) != [v < 0 for v in vals]
        p = swar.to_twos_complement(m, s)
        bad["to_twos_complement"] += swar.unpack(p) != vals
        half = mb // 2
        small = [rng.randint(-(1 << half) + 1, (1 << half) - 1) for _ in range(n)]
        k = rng.randint(-(1 << (mb - half)) + 1, (1 << (mb - half)) - 1)
        pm, ps = swar.broadcast_multiply(*swar.pack(small, lay), k)
        want = [v * k for v in small]
        got_m, got_s = swar.unpack_magnitudes(pm), swar.unpack_signs(ps)
        bad["broadcast_multiply"] += got_m != [abs(w) for w in want] or any(
            w != 0 and g != (w < 0) for g, w in zip(got_s, want)
        )
        other = [rng.randint(-(top >> 1), top >> 1) for _ in range(n)]
        halfv = [v // 2 for v in vals]
        added = swar.lanewise_add(swar.pack_signed(halfv, lay), swar.pack_signed(other, lay))
        bad["lanewise_add"] += swar.unpack(added) != [x + y for x, y in zip(halfv, other)]
        bad["extract_sign_bits"] += swar.extract_sign_bits(p) != sum((v < 0) << i for i, v in enumerate(vals))
        bad["find_zero_lanes"] += swar.find_zero_lanes(p) != sum((v == 0) << i for i, v in enumerate(vals))
    return bad


def test_2_swar_scalar_oracle():
    rng = random.Random(2024)
    configs = [(mb, W) for mb in range(4, 21) for W in (64, 128)]
    per_config = -(-10_000 // len(configs))
    t0 = time.perf_counter()
    totals = {}
    for mb, W in configs:
        for op, n in _swar_trials(rng, swar.make_layout(mb, W), per_config).items():
            totals[op] = totals.get(op, 0) + n
    elapsed = time.perf_counter() - t0
    trials = per_config * len(configs)
    ok = all(v == 0 for v in totals.values()) and trials >= 10_000 and elapsed < 30
    record("2. SWAR scalar oracle", ok, f"{trials} trials/op, mismatches={totals}, {elapsed:.1f}s")


def test_3_order_preservation():
    rng = np.random.default_rng(3)
    mags = 10.0 ** rng.uniform(-6, 6, 100_000)
    vals = (mags * rng.choice([-1.0, 1.0], mags.size)).tolist()
    # repeat some values so equality is exercised too
    vals[::97] = vals[1::97][: len(vals[::97])]
    t0 = time.perf_counter()
    spec = compute_cut_bit(vals)
    pairs = sorted((v, quantize(v, spec)) for v in vals)
    elapsed = time.perf_counter() - t0
    violations = sum(
        (v0 < v1 and q0 >= q1) or (v0 == v1 and q0 != q1) for (v0, q0), (v1, q1) in zip(pairs, pairs[1:])
    )
    ok = violations == 0 and elapsed < 10
    record("3. order preservation", ok, f"{len(vals)} reals, cut_bit={spec.cut_bit}, B={spec.width_B}, violations={violations}, {elapsed:.1f}s")


def test_4_oracle_equivalence():
    t0 = time.perf_counter()
    details = []
    total_bad = 0
    for k, n in enumerate((10, 100, 1000)):
        sub = random_subdivision(n, 40 + k)
        idx = build(sub)
        bad = 0
        for x, y in random_queries(sub, 10_000, 40 + k):
            bad += not locate(idx, x, y).same_location(locate_bruteforce(idx.geometry, x, y))
        total_bad += bad
        details.append(f"n={n}: T={idx.n_triangles} mismatches={bad}")
    elapsed = time.perf_counter() - t0
    ok = total_bad == 0 and elapsed < 60
    record("4. oracle equivalence", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def _distance_to_triangle(tri, x, y):
    """Euclidean distance from (x, y) to the closed triangle, in floats."""
    signed = []
    for j in range(3):
        (ax, ay), (bx, by) = tri[j], tri[(j + 1) % 3]
        signed.append((bx - ax) * (y - ay) - (by - ay) * (x - ax))
    if min(signed) >= 0:
        return 0.0
    best = math.inf
    for j in range(3):
        (ax, ay), (bx, by) = tri[j], tri[(j + 1) % 3]
        dx, dy = bx - ax, by - ay
        t = max(0.0, min(1.0, ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)))
        best = min(best, math.hypot(x - ax - t * dx, y - ay - t * dy))
    return best


def _boundary_distance(tri, x, y):
    """Distance from a point in the closed triangle to its boundary."""
    out = math.inf
    for j in range(3):
        (ax, ay), (bx, by) = tri[j], tri[(j + 1) % 3]
        out = min(out, abs((bx - ax) * (y - ay) - (by - ay) * (x - ax)) / math.hypot(bx - ax, by - ay))
    return out


def _near_edge_queries(idx, rng, count):
    v = idx.geometry.real_triangle_array
    out = []
    for _ in range(count):
        t = rng.randrange(idx.n_triangles)
        j = rng.randrange(3)
        (ax, ay), (bx, by) = v[t, j], v[t, (j + 1) % 3]
        s = rng.random()
        nx, ny = -(by - ay), bx - ax
        norm = math.hypot(nx, ny)
        off = rng.uniform(-1, 1) * idx.error_budget
        out.append((float(ax + s * (bx - ax) + off * nx / norm), float(ay + s * (by - ay) + off * ny / norm)))
    return out


def test_5_error_budget():
    far_checked = far_bad = near_checked = near_differ = near_bad = 0
    for k, n in enumerate((30, 300)):
        sub = random_subdivision(n, 50 + k)
        idx = build(sub)
        budget = idx.error_budget
        geom = idx.geometry
        rng = random.Random(50 + k)
        for x, y in random_queries(sub, 5000, 50 + k) + _near_edge_queries(idx, rng, 5000):
            got = locate(idx, x, y, fallback=False)
            want = locate_bruteforce(geom, x, y)
            dist = edge_line_distances(idx, x, y).min()
            if dist > budget * (1 + 1e-9):
                far_checked += 1
                far_bad += not got.same_location(want)
                continue
            near_checked += 1
            if got.same_location(want):
                continue
            near_differ += 1
            # a differing answer must stay within the budget of the query and, when both
            # answers are triangles, the two must share a vertex
            tris = geom.triangles
            if got.kind is Kind.OUTSIDE:
                ok_here = _boundary_distance(geom.real_triangle(want.triangle), x, y) <= budget
            else:
                ok_here = _distance_to_triangle(geom.real_triangle(got.triangle), x, y) <= budget
                if want.kind is not Kind.OUTSIDE:
                    ok_here = ok_here and bool(set(tris[got.triangle]) & set(tris[want.triangle]))
            near_bad += not ok_here
    ok = far_bad == 0 and near_bad == 0 and far_checked > 0 and near_checked > 0
    record(
        "5. error budget",
        ok,
        f"far: {far_checked} checked, {far_bad} wrong; near: {near_checked} checked, "
        f"{near_differ} differ, {near_bad} to a non-incident triangle",
    )


def _strip(T):
    """T triangles in a unit-height lattice strip, one face each."""
    cols = T // 2 + 2
    verts = [(float(i), 0.0) for i in range(cols)] + [(float(i), 1.0) for i in range(cols)]
    faces = []
    for i in range(cols - 1):
        faces.append((i, i + 1, cols + i + 1))
        faces.append((i, cols + i + 1, cols + i))
    return Subdivision(verts, faces[:T])


def test_6_constant_word_ops():
    counts = {}
    for W in (64, 128, 256):
        for T in range(1, 40):
            idx = build(_strip(T), W)
            if idx.words_per_stream != 1:
                break
            rng = random.Random(T)
            x_lo, y_lo, x_hi, y_hi = idx.geometry.bbox
            qs = [(rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)) for _ in range(200)]
            counts[(W, T)] = {evaluate_op_count(idx, x, y) for x, y in qs}
    one_word = set().union(*counts.values())
    rows = []
    n_queries = 0
    for k, n in enumerate((10, 50, 200, 800)):
        idx = build(random_subdivision(n, 60 + k))
        qs = [q for q in random_queries(idx.geometry, 4000, 60 + k) if in_range(idx, *q)][:2500]
        n_queries += len(qs)
        rows.append((idx.words_per_stream, {evaluate_op_count(idx, x, y) for x, y in qs}))
    per_query_constant = all(len(c) == 1 for _, c in rows)
    (w0, (c0,)), (w1, (c1,)) = rows[0], rows[-1]
    slope = (c1 - c0) / (w1 - w0)
    intercept = c0 - slope * w0
    linear = per_query_constant and all(next(iter(c)) == slope * w + intercept for w, c in rows)
    ok = len(one_word) == 1 and {W for W, _ in counts} == {64, 128, 256} and linear and n_queries >= 10_000
    record(
        "6. constant word-op query",
        ok,
        f"one-word counts {sorted(one_word)} over {len(counts)} (W, T) pairs; "
        f"multi-word fit ops = {slope:g}*words + {intercept:g} over {n_queries} queries, "
        f"words={[w for w, _ in rows]}",
    )


def test_7_serialization_determinism():
    sub = random_subdivision(500, 70)
    text = format_subdivision(sub).encode()
    first = dumps(build(parse_subdivision(text.decode())))
    second = dumps(build(parse_subdivision(text.decode())))
    again = dumps(loads(first))
    wide = dumps(build(sub, 128))
    ok = first == second == again and dumps(loads(wide)) == wide
    record("7. serialization determinism", ok, f"{len(first)} bytes; build/build equal={first == second}, round trip equal={first == again}")
