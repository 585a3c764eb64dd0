"""Order-preserving conversion of real coordinates to integers.

Every coordinate is cut at a single bit position: ``quantize(x) = int(x * 2**-cut_bit)``
with truncation toward zero. The cut is chosen from the most significant bits of the
gaps between consecutive sorted coordinates, then refined by two extra blocks of
precision so the truncation error stays below ``1 / max_abs**2``.

All arithmetic on the inputs is exact: floats are treated as the dyadic rationals they
represent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable

from wordloc.errors import DegenerateInputError, InputError, OutOfRangeError


@dataclass(frozen=True)
class CutSpec:
    """Quantization contract shared by the build and every query.

    ``base_bit`` is the coarsest order-preserving cut; ``cut_bit`` is the refined cut
    actually used. ``err`` is ``2**cut_bit`` and bounds the truncation error of a
    single coordinate.
    """

    cut_bit: int
    width_B: int
    err: float
    max_abs: float
    base_bit: int = 0

    def __post_init__(self):
        if self.width_B < 1:
            raise ValueError(f"width_B must be positive, got {self.width_B}")


def _check_finite(x) -> None:
    if isinstance(x, float) and not math.isfinite(x):
        raise InputError(f"non-finite coordinate {x!r}")


def msb(x) -> int:
    """Index k of the most significant bit of ``x``: ``2**k <= x < 2**(k+1)``.

    Negative results mean the leading bit is fractional.
    """
    _check_finite(x)
    if not x > 0:
        raise InputError(f"msb needs a positive value, got {x!r}")
    if isinstance(x, int):
        return x.bit_length() - 1
    if isinstance(x, float):
        return math.frexp(x)[1] - 1
    num, den = x.as_integer_ratio()
    k = num.bit_length() - den.bit_length()
    if (num << max(0, -k)) < (den << max(0, k)):
        k -= 1
    return k


def quantize_with_cut(x, cut_bit: int) -> int:
    """``int(x * 2**-cut_bit)`` computed exactly, truncating toward zero."""
    _check_finite(x)
    num, den = x.as_integer_ratio()
    if cut_bit <= 0:
        num <<= -cut_bit
    else:
        den <<= cut_bit
    q = abs(num) // den
    return -q if num < 0 else q


def _sign_class_gaps(values: list) -> Iterable[Fraction]:
    prev = None
    for v in values:
        if prev is not None and v != prev and (v < 0) == (prev < 0):
            yield Fraction(v) - Fraction(prev)
        prev = v


def base_cut_bit(coords) -> int:
    """Coarsest cut that keeps every same-sign gap nonzero after truncation.

    Gaps are only taken between neighbours of the same sign class. Truncation toward
    zero can still merge a small negative value with zero, so when both classes are
    present the magnitude of the largest negative value also bounds the cut.
    """
    values = sorted(coords)
    if not values:
        raise InputError("no coordinates to quantize")
    for v in values:
        _check_finite(v)
    if len(values) > 1 and values[0] == values[-1]:
        raise DegenerateInputError(f"all coordinates equal {values[0]!r}; nothing to order")
    bits = [msb(g) for g in _sign_class_gaps(values)]
    if values[0] < 0 <= values[-1]:
        largest_negative = max(v for v in values if v < 0)
        bits.append(msb(-Fraction(largest_negative)))
    return min(bits) if bits else 0


def _width(coords, cut_bit: int) -> int:
    return max(1, max(abs(quantize_with_cut(x, cut_bit)) for x in coords).bit_length())


def compute_cut_bit(coords) -> CutSpec:
    coords = list(coords)
    base = base_cut_bit(coords)
    max_abs = max(abs(x) for x in coords)
    width0 = _width(coords, base)
    cut = base - 2 * width0
    if max_abs >= 1:
        # keeps err < 1/max_abs**2 even when every gap is wide (base > 0)
        cut = min(cut, -2 * (msb(max_abs) + 1))
    return make_cut_spec(coords, cut, base_bit=base, max_abs=max_abs)


def make_cut_spec(coords, cut_bit: int, *, base_bit: int | None = None, max_abs=None) -> CutSpec:
    coords = list(coords)
    if max_abs is None:
        max_abs = max(abs(x) for x in coords)
    return CutSpec(
        cut_bit=cut_bit,
        width_B=_width(coords, cut_bit),
        err=math.ldexp(1.0, cut_bit),
        max_abs=float(max_abs),
        base_bit=cut_bit if base_bit is None else base_bit,
    )


def refine(spec: CutSpec, coords, extra_bits: int = 2) -> CutSpec:
    """Same spec cut ``extra_bits`` finer."""
    return make_cut_spec(coords, spec.cut_bit - extra_bits, base_bit=spec.base_bit, max_abs=spec.max_abs)


def quantize(x, spec: CutSpec) -> int:
    q = quantize_with_cut(x, spec.cut_bit)
    if abs(q) >= 1 << spec.width_B:
        raise OutOfRangeError(
            f"{x!r} quantizes to {q}, which needs more than {spec.width_B} magnitude bits"
        )
    return q


def error_budget(spec: CutSpec, coeff_bound: Real) -> float:
    """Upper bound on the drift between the real and the quantized line evaluation.

    ``coeff_bound`` bounds |a| and |b| of every edge line in original units.
    """
    err = spec.err
    return 2 * coeff_bound * err + 2 * spec.max_abs * err + 2 * err * err + err
