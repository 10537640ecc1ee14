"""Bit-exact software emulation of reduced-precision binary floats.

Values are carried in the host double; each emulated operation computes
the exact rational result of its operands and applies a single
round-to-nearest-even step into the target format.  No fused operations,
no double rounding.  Subnormals and signed-infinity overflow follow the
format's rules.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

from .core import Rational, sum_exact, to_float


class PrecisionRegime(NamedTuple):
    """A binary floating-point format, or the exact-arithmetic marker."""

    name: str
    significand_bits: float  # includes the hidden bit; math.inf for EXACT
    exponent_bits: int


BF16 = PrecisionRegime("BF16", 8, 8)
FP32 = PrecisionRegime("FP32", 24, 8)
FP64 = PrecisionRegime("FP64", 53, 11)
EXACT = PrecisionRegime("EXACT", math.inf, 0)

REGIMES = {r.name: r for r in (BF16, FP32, FP64, EXACT)}


def _div_rne(a: int, b: int) -> int:
    q, r = divmod(a, b)
    twice = 2 * r
    if twice > b or (twice == b and q & 1):
        return q + 1
    return q


def _round_int_ratio(num: int, den: int, regime: PrecisionRegime) -> float:
    """Correctly rounded num/den (den > 0) into the regime's grid."""
    if num == 0:
        return 0.0
    p = int(regime.significand_bits)
    emax = (1 << (regime.exponent_bits - 1)) - 1
    emin = 1 - emax
    sign = -1.0 if num < 0 else 1.0
    a = abs(num)
    # e = floor(log2(a/den))
    e = a.bit_length() - den.bit_length()
    scaled = a << -e if e < 0 else a
    base = den << e if e > 0 else den
    if scaled < base:
        e -= 1
    # quantum exponent: normals use e - p + 1, subnormals are pinned
    shift = max(e, emin) - p + 1
    if shift <= 0:
        m = _div_rne(a << -shift, den)
    else:
        m = _div_rne(a, den << shift)
    if m == 0:
        return sign * 0.0
    if shift + m.bit_length() - 1 > emax:
        return sign * math.inf
    return sign * math.ldexp(m, shift)


def round_to(x: float, regime: PrecisionRegime) -> float:
    """Nearest representable value in the regime, ties to even.

    Idempotent per regime and monotone in x; infinities and NaN pass
    through unchanged.
    """
    if regime is EXACT or regime.name == "EXACT":
        raise ValueError("EXACT is not a rounding target")
    if not math.isfinite(x):
        return x
    n, d = x.as_integer_ratio()
    return _round_int_ratio(n, d, regime)


def round_rational_to(q: Rational, regime: PrecisionRegime) -> float:
    """Round an exact fraction directly into the regime (one rounding)."""
    if regime is EXACT or regime.name == "EXACT":
        raise ValueError("EXACT is not a rounding target")
    return _round_int_ratio(q.num, q.den, regime)


def emulated_op(kind: str, a: float, b: float, regime: PrecisionRegime) -> float:
    """One regime operation: exact add/mul, then a single rounding.

    Operands must already be representable in the regime.  Non-finite
    operands defer to the host's propagation rules.
    """
    if kind not in ("add", "mul"):
        raise ValueError(f"unknown op kind {kind!r}")
    if regime is EXACT or regime.name == "EXACT":
        # exact arithmetic collapses once into the widest native float
        if kind == "add":
            return _round_int_ratio(*_exact_add(a, b), FP64)
        return _round_int_ratio(*_exact_mul(a, b), FP64)
    if not (math.isfinite(a) and math.isfinite(b)):
        host = a + b if kind == "add" else a * b
        if math.isfinite(host):  # e.g. inf * 0 handled by host -> nan
            return round_to(host, regime)
        return host
    if kind == "add":
        num, den = _exact_add(a, b)
    else:
        num, den = _exact_mul(a, b)
    return _round_int_ratio(num, den, regime)


def _exact_add(a: float, b: float) -> tuple[int, int]:
    n1, d1 = a.as_integer_ratio()
    n2, d2 = b.as_integer_ratio()
    # denominators are powers of two: align by shifting
    if d1 == d2:
        return n1 + n2, d1
    if d1 < d2:
        return n1 * (d2 // d1) + n2, d2
    return n1 + n2 * (d1 // d2), d1


def _exact_mul(a: float, b: float) -> tuple[int, int]:
    n1, d1 = a.as_integer_ratio()
    n2, d2 = b.as_integer_ratio()
    return n1 * n2, d1 * d2


def emulated_sub(a: float, b: float, regime: PrecisionRegime) -> float:
    """a - b with one rounding; negation itself is exact in binary floats."""
    return emulated_op("add", a, -b, regime)


def reduce_ordered(
    values: Sequence[float], order: Sequence[int], regime: PrecisionRegime
) -> float:
    """Left fold of emulated addition in the given evaluation order.

    Deterministic for a fixed order.  Under EXACT the fold is performed
    in exact arithmetic (order cannot matter) and collapsed once at the
    end.
    """
    if sorted(order) != list(range(len(values))):
        raise ValueError("order must be a permutation of the value indices")
    if not values:
        return 0.0
    if regime is EXACT or regime.name == "EXACT":
        from .core import from_float

        total = sum_exact(from_float(values[i]) for i in order)
        return to_float(total)
    acc = values[order[0]]
    for i in order[1:]:
        acc = emulated_op("add", acc, values[i], regime)
    return acc


def ulp_in(x: float, regime: PrecisionRegime) -> float:
    """Spacing of the regime's grid at finite nonzero x."""
    p = int(regime.significand_bits)
    emax = (1 << (regime.exponent_bits - 1)) - 1
    emin = 1 - emax
    e = math.frexp(abs(x))[1] - 1  # floor(log2 |x|) for normal doubles
    return math.ldexp(1.0, max(e, emin) - p + 1)
