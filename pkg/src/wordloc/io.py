"""Text input formats and the binary index file.

Index file, version 1. All integers little-endian::

    magic      4s   b"WLOC"
    version    u16  1
    reserved   u16  0
    layout     4*u32  W, L, K, magnitude_bits
    cut        i32 cut_bit, i32 base_bit, u32 width_B, f64 max_abs
    budget     f64  error budget
    counts     3*u32  vertices n, faces F, triangles T
    vertices   n * (f64 x, f64 y)      the original reals, bit for bit
    triangles  T * (3*u32 vertex ids, u32 face id)
    streams    a magnitudes, a signs, b magnitudes, b signs, c, slack;
               each ceil(3T / K) words of ceil(W / 8) bytes, lane 0 lowest
    crc32      u32  over every preceding byte

Quantized coordinates are not stored; they are recomputed from the reals and the cut,
and the streams are re-derived on load and must match the stored words.
"""

from __future__ import annotations

import math
import struct
import zlib
from pathlib import Path

from wordloc.errors import CorruptIndexError, InputError, WordlocError
from wordloc.locator import PackedEdgeIndex, pack_streams
from wordloc.quantizer import CutSpec, quantize
from wordloc.subdivision import Subdivision, TriangulatedSubdivision
from wordloc.swar import LaneLayout, PackedMagnitudes, PackedSigned, SignWord, make_constants

MAGIC = b"WLOC"
VERSION = 1

_HEAD = struct.Struct("<4sHH4Iii I d d 3I")


def _number(token: str, where: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise InputError(f"{where}: {token!r} is not a number") from None
    if not math.isfinite(v):
        raise InputError(f"{where}: {token!r} is not finite")
    return v


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_subdivision(text: str) -> Subdivision:
    """Parse ``vertices <n>`` / n ``x y`` lines / ``faces <f>`` / f index lines."""
    lines = list(_content_lines(text))
    pos = 0

    def header(word: str) -> int:
        nonlocal pos
        if pos >= len(lines):
            raise InputError(f"missing '{word} <count>' line")
        no, line = lines[pos]
        parts = line.split()
        if len(parts) != 2 or parts[0] != word or not parts[1].isdigit():
            raise InputError(f"line {no}: expected '{word} <count>', got {line!r}")
        pos += 1
        return int(parts[1])

    n = header("vertices")
    verts = []
    for _ in range(n):
        if pos >= len(lines):
            raise InputError(f"expected {n} vertex lines, found {len(verts)}")
        no, line = lines[pos]
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {no}: expected 'x y', got {line!r}")
        verts.append((_number(parts[0], f"line {no}"), _number(parts[1], f"line {no}")))
        pos += 1
    f = header("faces")
    faces = []
    for _ in range(f):
        if pos >= len(lines):
            raise InputError(f"expected {f} face lines, found {len(faces)}")
        no, line = lines[pos]
        try:
            faces.append(tuple(int(tok) for tok in line.split()))
        except ValueError:
            raise InputError(f"line {no}: face indices must be integers, got {line!r}") from None
        pos += 1
    if pos != len(lines):
        raise InputError(f"line {lines[pos][0]}: unexpected trailing content")
    return Subdivision(tuple(verts), tuple(faces))


def format_subdivision(s: Subdivision) -> str:
    out = [f"vertices {len(s.vertices)}"]
    out += [f"{x!r} {y!r}" for x, y in s.vertices]
    out.append(f"faces {len(s.faces)}")
    out += [" ".join(map(str, face)) for face in s.faces]
    return "\n".join(out) + "\n"


def parse_queries(text: str) -> list[tuple[float, float]]:
    out = []
    for no, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {no}: expected 'x y', got {line!r}")
        out.append((_number(parts[0], f"line {no}"), _number(parts[1], f"line {no}")))
    return out


def read_subdivision(path) -> Subdivision:
    return parse_subdivision(Path(path).read_text())


def _word_bytes(layout: LaneLayout) -> int:
    return (layout.word_bits_W + 7) // 8


def dumps(idx: PackedEdgeIndex) -> bytes:
    g = idx.geometry
    lay = idx.layout
    parts = [
        _HEAD.pack(
            MAGIC, VERSION, 0,
            lay.word_bits_W, lay.lane_bits_L, lay.lanes_per_word_K, lay.magnitude_bits,
            idx.cut.cut_bit, idx.cut.base_bit, idx.cut.width_B, idx.cut.max_abs,
            idx.error_budget,
            len(g.vertices), g.n_faces, len(g.triangles),
        )
    ]
    parts += [struct.pack("<dd", x, y) for x, y in g.vertices]
    parts += [struct.pack("<4I", *tri, f) for tri, f in zip(g.triangles, g.face_of_triangle)]
    wb = _word_bytes(lay)
    for stream in (idx.a_mags, idx.a_signs, idx.b_mags, idx.b_signs, idx.c, idx.slack):
        parts += [w.to_bytes(wb, "little") for w in stream.words]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads(data: bytes) -> PackedEdgeIndex:
    if len(data) < _HEAD.size + 4 or data[:4] != MAGIC:
        raise CorruptIndexError("not an index file (bad magic)")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise CorruptIndexError("checksum mismatch")
    (_, version, _, W, L, K, mb, cut_bit, base_bit, width, max_abs, budget, n, nf, T) = _HEAD.unpack_from(body)
    if version != VERSION:
        raise CorruptIndexError(f"unsupported index version {version}")
    layout = LaneLayout(W, L, K, mb)
    if L != mb + 2 or K != W // L or K < 1:
        raise CorruptIndexError(f"inconsistent layout {layout}")
    cut = CutSpec(cut_bit, width, math.ldexp(1.0, cut_bit), max_abs, base_bit)
    off = _HEAD.size
    try:
        verts = [struct.unpack_from("<dd", body, off + 16 * i) for i in range(n)]
        off += 16 * n
        rows = [struct.unpack_from("<4I", body, off + 16 * i) for i in range(T)]
        off += 16 * T
        wb = _word_bytes(layout)
        nwords = layout.words_for(3 * T)
        streams = []
        for _ in range(6):
            words = [int.from_bytes(body[off + wb * i : off + wb * (i + 1)], "little") for i in range(nwords)]
            off += wb * nwords
            streams.append(words)
    except struct.error as exc:
        raise CorruptIndexError(f"truncated index: {exc}") from None
    if off != len(body):
        raise CorruptIndexError("index length does not match its header")
    for tri in rows:
        if max(tri[:3], default=0) >= n or tri[3] >= max(nf, 1):
            raise CorruptIndexError("triangle refers to a missing vertex or face")
    try:
        return _assemble(layout, cut, budget, verts, rows, nf, streams)
    except CorruptIndexError:
        raise
    except WordlocError as exc:
        raise CorruptIndexError(f"index content is inconsistent: {exc}") from None


def _assemble(layout, cut, budget, verts, rows, nf, streams) -> PackedEdgeIndex:
    T = len(rows)
    geometry = TriangulatedSubdivision(
        vertices=tuple(verts),
        quantized=tuple((quantize(x, cut), quantize(y, cut)) for x, y in verts),
        triangles=tuple(tuple(r[:3]) for r in rows),
        face_of_triangle=tuple(r[3] for r in rows),
        cut=cut,
        n_faces=nf,
    )
    count = 3 * T
    try:
        a_m = PackedMagnitudes.from_words(streams[0], layout, count)
        a_s = SignWord.from_words(streams[1], layout, count)
        b_m = PackedMagnitudes.from_words(streams[2], layout, count)
        b_s = SignWord.from_words(streams[3], layout, count)
        c = PackedSigned.from_words(streams[4], layout, count)
        slack = PackedSigned.from_words(streams[5], layout, count)
    except ValueError as exc:
        raise CorruptIndexError(str(exc)) from None
    expected = pack_streams(geometry, layout)
    if ((a_m, a_s), (b_m, b_s), c, slack) != expected:
        raise CorruptIndexError("stored coefficient words disagree with the stored geometry")
    return PackedEdgeIndex(
        layout=layout,
        constants=make_constants(layout),
        cut=cut,
        a_mags=a_m,
        a_signs=a_s,
        b_mags=b_m,
        b_signs=b_s,
        c=c,
        slack=slack,
        geometry=geometry,
        error_budget=budget,
    )


def save_index(idx: PackedEdgeIndex, path) -> None:
    Path(path).write_bytes(dumps(idx))


def load_index(path) -> PackedEdgeIndex:
    return loads(Path(path).read_bytes())
