"""Exact rational arithmetic with lazy reduction and bit-width accounting.

Values are fractions of arbitrary-precision integers.  Arithmetic never
reduces fractions on its own: reduction happens only through `simplify`
or through policies layered on top (grid projection, register-pressure
triggers).  Every operation is a pure function over immutable values, so
numbers can be shared freely between threads.

The integer type is the host integer, which already is a sign plus a
little-endian sequence of machine-word limbs.  No contract below depends
on the limb size; everything is stated on values and bit counts.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple


def bit_width(n: int) -> int:
    """Position of the highest set bit plus one; 0 for zero."""
    return abs(n).bit_length()


class BitReport(NamedTuple):
    """Storage footprint of a fraction: numerator, denominator, total bits."""

    num_bits: int
    den_bits: int
    total_bits: int


class Rational:
    """An exact fraction num/den with den > 0.

    `reduced` is a bookkeeping flag: True only when gcd(|num|, den) = 1 is
    known.  Arithmetic results leave it False (lazy reduction); `simplify`
    returns an equal value with the flag set.  Instances are immutable by
    convention; no method mutates.
    """

    __slots__ = ("num", "den", "reduced")

    def __init__(self, num: int, den: int = 1, *, reduced: bool = False):
        if den == 0:
            raise ZeroDivisionError("rational with zero denominator")
        if den < 0:
            num, den = -num, -den
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        # den == 1 is reduced by construction.
        object.__setattr__(self, "reduced", reduced or den == 1)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Rational is immutable")

    # -- comparisons are value-level (dens are positive, so cross-multiply) --

    def __eq__(self, other) -> bool:
        if isinstance(other, Rational):
            return self.num * other.den == other.num * self.den
        if isinstance(other, int):
            return self.num == other * self.den
        return NotImplemented

    def __hash__(self):
        g = math.gcd(self.num, self.den)
        n, d = self.num // g, self.den // g
        # integer-valued fractions must hash like the integer they equal
        return hash(n) if d == 1 else hash((n, d))

    def __lt__(self, other: "Rational") -> bool:
        return self.num * other.den < other.num * self.den

    def __le__(self, other: "Rational") -> bool:
        return self.num * other.den <= other.num * self.den

    def __gt__(self, other: "Rational") -> bool:
        return self.num * other.den > other.num * self.den

    def __ge__(self, other: "Rational") -> bool:
        return self.num * other.den >= other.num * self.den

    # -- arithmetic delegates to the module-level operations --

    def __add__(self, other: "Rational") -> "Rational":
        return rat_add(self, other)

    def __sub__(self, other: "Rational") -> "Rational":
        return rat_sub(self, other)

    def __mul__(self, other: "Rational") -> "Rational":
        return rat_mul(self, other)

    def __truediv__(self, other: "Rational") -> "Rational":
        return rat_div(self, other)

    def __neg__(self) -> "Rational":
        return Rational(-self.num, self.den, reduced=self.reduced)

    def __abs__(self) -> "Rational":
        return Rational(abs(self.num), self.den, reduced=self.reduced)

    def __bool__(self) -> bool:
        return self.num != 0

    def __repr__(self) -> str:
        return f"Rational({self.num}, {self.den})"

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    @property
    def is_negative(self) -> bool:
        return self.num < 0


ZERO = Rational(0)
ONE = Rational(1)


def bit_report(q: Rational) -> BitReport:
    nb = bit_width(q.num)
    db = bit_width(q.den)
    return BitReport(nb, db, nb + db)


def rat_add(a: Rational, b: Rational) -> Rational:
    """Exact sum, no reduction.

    Aligned denominators are added over the common denominator (still no
    gcd is taken), so uniform-grid data does not pay quadratic growth.
    An exact-zero operand contributes nothing, including to the result's
    representation.
    """
    if b.num == 0:
        return a
    if a.num == 0:
        return b
    d1, d2 = a.den, b.den
    if d1 == d2:
        s = a.num + b.num
        if _arith_hook is not None:
            _arith_hook("add", a.num, b.num, s)
        return Rational(s, d1)
    if d2 % d1 == 0:
        return Rational(a.num * (d2 // d1) + b.num, d2)
    if d1 % d2 == 0:
        return Rational(a.num + b.num * (d1 // d2), d1)
    return Rational(a.num * d2 + b.num * d1, d1 * d2)


def rat_sub(a: Rational, b: Rational) -> Rational:
    if b.num == 0:
        return a
    if a.num == 0:
        return Rational(-b.num, b.den, reduced=b.reduced)
    d1, d2 = a.den, b.den
    if d1 == d2:
        return Rational(a.num - b.num, d1)
    if d2 % d1 == 0:
        return Rational(a.num * (d2 // d1) - b.num, d2)
    if d1 % d2 == 0:
        return Rational(a.num - b.num * (d1 // d2), d1)
    return Rational(a.num * d2 - b.num * d1, d1 * d2)


def rat_mul(a: Rational, b: Rational) -> Rational:
    """Exact product: two independent integer multiplications.

    A zero factor collapses to the canonical zero representation."""
    if a.num == 0 or b.num == 0:
        return ZERO
    if _arith_hook is not None:
        n = a.num * b.num
        d = a.den * b.den
        _arith_hook("mul", a.num, b.num, n)
        _arith_hook("mul", a.den, b.den, d)
        return Rational(n, d)
    return Rational(a.num * b.num, a.den * b.den)


def rat_div(a: Rational, b: Rational) -> Rational:
    if b.num == 0:
        raise ZeroDivisionError("division by zero rational")
    return Rational(a.num * b.den, a.den * b.num)


def rat_from_int(n: int) -> Rational:
    return Rational(n, 1, reduced=True)


# Optional integrity hook: called as hook(kind, x, y, result) for the
# integer multiplies inside rat_mul.  None disables it with a single
# pointer test per operation.
_arith_hook = None


def set_arith_hook(hook) -> None:
    """Install (or clear, with None) the integer-operation shadow hook."""
    global _arith_hook
    _arith_hook = hook


def stein_gcd(u: int, v: int) -> int:
    """Greatest common divisor via shifts, parity tests, and subtraction.

    Division-free binary gcd; gcd(0, v) = v.  This is the reference model
    for a shift/subtract hardware reducer.  `simplify` uses the host gcd
    for speed; the two are property-tested against each other.
    """
    if u < 0 or v < 0:
        raise ValueError("stein_gcd requires non-negative operands")
    if u == 0:
        return v
    if v == 0:
        return u
    # (x & -x).bit_length() - 1 counts trailing zeros: a batched parity
    # test plus shift.
    tu = (u & -u).bit_length() - 1
    tv = (v & -v).bit_length() - 1
    shift = min(tu, tv)
    u >>= tu
    v >>= tv
    while u != v:
        if u < v:
            u, v = v, u
        u -= v
        u >>= (u & -u).bit_length() - 1
    return u << shift


def simplify(q: Rational) -> Rational:
    """Equal value with gcd(|num|, den) = 1; total bits never increase."""
    if q.reduced:
        return q
    g = math.gcd(q.num, q.den)
    if g == 1:
        return Rational(q.num, q.den, reduced=True)
    return Rational(q.num // g, q.den // g, reduced=True)


def _div_rne(a: int, b: int) -> int:
    """round(a / b) to nearest, ties to even; b > 0, a any sign."""
    q, r = divmod(a, b)
    twice = 2 * r
    if twice > b or (twice == b and q & 1):
        return q + 1
    return q


def to_rational_with_loss(x: float, scale: int) -> tuple[Rational, bool]:
    """Lift a binary float onto the fraction grid x*scale/scale.

    Returns (value, exact): `exact` is False when x*scale is not an
    integer and had to be rounded to nearest (ties to even).  The result
    is simplified.  `scale` must be a power of two >= 1.
    """
    if not math.isfinite(x):
        raise ValueError("cannot lift a non-finite value")
    if scale < 1 or scale & (scale - 1):
        raise ValueError("scale must be a power of two >= 1")
    n0, d0 = x.as_integer_ratio()  # exact: d0 is a power of two
    t = n0 * scale
    if t % d0 == 0:
        return simplify(Rational(t // d0, scale)), True
    return simplify(Rational(_div_rne(t, d0), scale)), False


def to_rational(x: float, scale: int) -> Rational:
    """Lift a binary float to an exact fraction over a power-of-two scale."""
    return to_rational_with_loss(x, scale)[0]


def from_float(x: float) -> Rational:
    """The exact value of a finite binary float as a fraction."""
    if not math.isfinite(x):
        raise ValueError("cannot lift a non-finite value")
    n, d = x.as_integer_ratio()
    return Rational(n, d, reduced=True)


def to_float(q: Rational) -> float:
    """Round-to-nearest-even collapse to the widest native binary float.

    Magnitude overflow collapses to a signed infinity.
    """
    try:
        return q.num / q.den
    except OverflowError:
        return math.inf if q.num > 0 else -math.inf


def floor_log2(q: Rational) -> int:
    """Largest e with 2**e <= q; q must be positive."""
    if q.num <= 0:
        raise ValueError("floor_log2 requires a positive value")
    a, b = q.num, q.den
    e = a.bit_length() - b.bit_length()
    if e >= 0:
        if a < b << e:
            e -= 1
    else:
        if a << -e < b:
            e -= 1
    return e


class ApproxResult(NamedTuple):
    value: Rational
    tolerance_miss: bool


def _simplest_between(a: int, b: int, c: int, d: int) -> tuple[int, int]:
    """Simplest fraction p/q with a/b <= p/q <= c/d; requires 0 <= a/b <= c/d.

    Stern-Brocot mediant descent with run-length acceleration: maximal
    runs of same-direction mediant steps are taken with one integer
    division, so the cost follows the continued-fraction length rather
    than the denominator.  Returns a reduced (p, q).
    """
    coeffs = []
    while True:
        k = a // b
        if a % b == 0:
            coeffs.append(k)  # the lower endpoint is the integer k
            break
        if c >= (k + 1) * d:
            coeffs.append(k + 1)  # the integer k+1 lies inside
            break
        # both endpoints strictly inside (k, k+1): peel k, flip to
        # reciprocals (which swaps the interval ends)
        coeffs.append(k)
        a, b, c, d = d, c - k * d, b, a - k * b
    p, q = coeffs[-1], 1
    for x in reversed(coeffs[:-1]):
        p, q = x * p + q, p
    return p, q


def _nearest_fixed_grid(x: Rational, d_max: int) -> Rational:
    """Nearest point of the uniform grid {k/d_max}; ties toward the
    smaller value.  This is the codebook projection used when the
    tolerance cannot be met: a shared denominator keeps the re-grounded
    state's representation aligned for downstream accumulation.
    """
    # ceil(x*d_max - 1/2): round half toward the smaller value
    k = -((-(2 * x.num * d_max - x.den)) // (2 * x.den))
    return simplify(Rational(k, d_max))


def rational_approx_detail(x: Rational, eps: Rational, d_max: int) -> ApproxResult:
    """Smallest-denominator fraction within eps of x, denominator <= d_max.

    When no denominator <= d_max meets the tolerance, falls back to the
    nearest point of the uniform codebook {k/d_max} (the maximum a
    posteriori choice under a uniform prior over the codebook) and flags
    the miss.  Denominator ties break toward smaller distance, then
    smaller value.
    """
    if eps.num <= 0:
        raise ValueError("eps must be positive")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    lo = rat_sub(x, eps)
    hi = rat_add(x, eps)
    # Integer candidates first: they dominate every other denominator.
    ceil_lo = -((-lo.num) // lo.den)
    floor_hi = hi.num // hi.den
    if ceil_lo <= floor_hi:
        # nearest integer to x, ties toward the smaller one
        k = -((-(2 * x.num - x.den)) // (2 * x.den))  # ceil(x - 1/2)
        k = min(max(k, ceil_lo), floor_hi)
        return ApproxResult(Rational(k, 1, reduced=True), False)
    # No integer inside, so the interval sits strictly between two
    # integers and does not straddle zero.  Reflect negatives.
    neg = hi.num < 0
    if neg:
        lo, hi = Rational(-hi.num, hi.den), Rational(-lo.num, lo.den)
    p, qden = _simplest_between(lo.num, lo.den, hi.num, hi.den)
    if neg:
        p = -p
    q = Rational(p, qden, reduced=True)
    if q.den <= d_max:
        return ApproxResult(q, False)
    return ApproxResult(_nearest_fixed_grid(x, d_max), True)


def rational_approx(x: Rational, eps: Rational, d_max: int) -> Rational:
    """Grid projection: see `rational_approx_detail`."""
    return rational_approx_detail(x, eps, d_max).value


def sum_exact(values: Iterable[Rational]) -> Rational:
    """Order-independent exact sum, returned in canonical reduced form.

    The fold itself is exact for any order; reducing the result makes the
    representation (not just the value) identical across permutations.
    """
    acc = ZERO
    for v in values:
        acc = rat_add(acc, v)
    return simplify(acc)


def parse_rational(text: str) -> Rational:
    """Parse "3/4", "-2", "0.01", or "1e-16" into an exact fraction."""
    s = text.strip()
    if "/" in s:
        a, b = s.split("/", 1)
        return simplify(Rational(int(a), int(b)))
    mantissa = s
    exp = 0
    for marker in ("e", "E"):
        if marker in mantissa:
            mantissa, e = mantissa.split(marker, 1)
            exp = int(e)
            break
    if "." in mantissa:
        head, frac = mantissa.split(".", 1)
        digits = (head or "0") + frac
        exp -= len(frac)
    else:
        digits = mantissa
    num = int(digits)
    if exp >= 0:
        return simplify(Rational(num * 10**exp, 1))
    return simplify(Rational(num, 10**-exp))


def format_rational(q: Rational) -> str:
    """Serialize as "num/den" in decimal."""
    return f"{q.num}/{q.den}"
