"""Command-line front end.

    wordloc build SUBDIVISION INDEX [--word-bits W]
    wordloc locate INDEX X Y | --queries FILE [--no-fallback]
    wordloc bench [--sizes 16,1024] [--queries N] [--seed S] [--word-bits W] [--no-fallback]

Exit status: 0 success, 1 input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from wordloc.bench import run_size
from wordloc.errors import CorruptIndexError, WordlocError
from wordloc.io import load_index, parse_queries, read_subdivision, save_index
from wordloc.locator import build, locate

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or min(sizes) < 3:
        raise argparse.ArgumentTypeError("every size must be at least 3")
    return sizes


def _word_bits(text: str) -> int:
    try:
        w = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"word bits must be an integer, got {text!r}") from None
    if w < 8 or w % 8:
        raise argparse.ArgumentTypeError("word bits must be a positive multiple of 8 (64 and 128 are typical)")
    return w


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return v


def cmd_build(args) -> int:
    sub = read_subdivision(args.input)
    idx = build(sub, args.word_bits)
    save_index(idx, args.output)
    lay = idx.layout
    print(f"triangles {idx.n_triangles}")
    print(f"lanes {idx.n_lanes}")
    print(f"cut_bit {idx.cut.cut_bit}")
    print(f"B {idx.cut.width_B}")
    print(f"L {lay.lane_bits_L}")
    print(f"K {lay.lanes_per_word_K}")
    print(f"words_per_stream {idx.words_per_stream}")
    print(f"error_budget {idx.error_budget!r}")
    return EXIT_OK


def cmd_locate(args) -> int:
    idx = load_index(args.index)
    if args.queries is not None:
        if args.x is not None or args.y is not None:
            raise WordlocError("give either X Y or --queries, not both")
        queries = parse_queries(Path(args.queries).read_text())
    else:
        if args.x is None or args.y is None:
            raise WordlocError("locate needs X Y or --queries FILE")
        queries = [(args.x, args.y)]
    out = sys.stdout
    for x, y in queries:
        out.write(locate(idx, x, y, fallback=not args.no_fallback).to_line() + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    status = EXIT_OK
    for k, n in enumerate(args.sizes):
        record, bad = run_size(
            n,
            args.queries,
            args.seed + k,
            word_bits=args.word_bits,
            fallback=not args.no_fallback,
            timing=not args.no_timing,
        )
        print(record.to_json(), flush=True)
        if bad is not None and status == EXIT_OK:
            print(bad.reproduction(), file=sys.stderr)
        if record.oracle_mismatch_count or record.op_count_varies:
            status = EXIT_VERIFY
    return status


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wordloc", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a packed index from a subdivision file")
    b.add_argument("input")
    b.add_argument("output")
    b.add_argument("--word-bits", type=_word_bits, default=64)
    b.set_defaults(func=cmd_build)

    loc = sub.add_parser("locate", help="locate one point or a file of points")
    loc.add_argument("index")
    loc.add_argument("x", nargs="?", type=_real)
    loc.add_argument("y", nargs="?", type=_real)
    loc.add_argument("--queries", metavar="FILE")
    loc.add_argument("--no-fallback", action="store_true", help="skip exact confirmation")
    loc.set_defaults(func=cmd_locate)

    be = sub.add_parser("bench", help="random subdivisions, locator checked against brute force")
    be.add_argument("--sizes", type=_sizes, default=[16, 1024])
    be.add_argument("--queries", type=int, default=1000)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--word-bits", type=_word_bits, default=64)
    be.add_argument("--no-fallback", action="store_true", help="packed filter only; compares far-from-edge queries")
    be.add_argument("--no-timing", action="store_true", help="omit throughput so reports are byte-stable")
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except CorruptIndexError as exc:
        print(f"error: corrupt index: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (WordlocError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
