"""Dense matrices of exact rationals with shared bit accounting.

Tensors are immutable; every operation builds a new one.  Matrix
multiplication stays lazy (no reduction) and uses an integer fast path
when both operands carry a uniform denominator, which is the common case
for grid-lifted data.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence, TextIO

from .core import (
    BitReport,
    Rational,
    ZERO,
    bit_report,
    bit_width,
    rat_add,
    rat_mul,
    simplify,
    to_float,
)


class RationalTensor:
    """A rows x cols matrix of exact rationals, stored row-major."""

    __slots__ = ("rows", "cols", "data", "max_bits", "uniform_den")

    def __init__(self, rows: int, cols: int, data: Sequence[Rational]):
        if len(data) != rows * cols:
            raise ValueError("data length does not match shape")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", tuple(data))
        max_bits = 0
        den0 = data[0].den if data else 1
        uniform = True
        for q in self.data:
            t = bit_width(q.num) + bit_width(q.den)
            if t > max_bits:
                max_bits = t
            if q.den != den0:
                uniform = False
        object.__setattr__(self, "max_bits", max_bits)
        object.__setattr__(self, "uniform_den", den0 if uniform else None)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("RationalTensor is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Rational]]) -> "RationalTensor":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat: list[Rational] = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(row)
        return cls(r, c, flat)

    @classmethod
    def identity(cls, n: int) -> "RationalTensor":
        one = Rational(1)
        return cls(n, n, [one if i == j else ZERO for i in range(n) for j in range(n)])

    def at(self, i: int, j: int) -> Rational:
        return self.data[i * self.cols + j]

    def row(self, i: int) -> tuple[Rational, ...]:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def transpose(self) -> "RationalTensor":
        return RationalTensor(
            self.cols,
            self.rows,
            [self.at(i, j) for j in range(self.cols) for i in range(self.rows)],
        )

    def map_entries(self, fn: Callable[[Rational], Rational]) -> "RationalTensor":
        return RationalTensor(self.rows, self.cols, [fn(q) for q in self.data])

    def simplify_entries(self) -> "RationalTensor":
        return self.map_entries(simplify)

    def to_float_rows(self) -> list[list[float]]:
        return [
            [to_float(self.at(i, j)) for j in range(self.cols)]
            for i in range(self.rows)
        ]

    def max_bit_report(self) -> BitReport:
        """Bit report of the widest entry (by total bits)."""
        widest = max(self.data, key=lambda q: bit_width(q.num) + bit_width(q.den))
        return bit_report(widest)

    def value_equal(self, other: "RationalTensor") -> bool:
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        return all(a == b for a, b in zip(self.data, other.data))


def rational_matmul(a: RationalTensor, b: RationalTensor) -> RationalTensor:
    """Exact matrix product, lazy (no reduction of the result entries).

    With uniform input denominators the accumulation runs over a shared
    denominator, so entry growth is bounded by bits(a) + bits(b) +
    ceil(log2 inner) + 1.
    """
    if a.cols != b.rows:
        raise ValueError(
            f"inner dimensions differ: {a.rows}x{a.cols} @ {b.rows}x{b.cols}"
        )
    inner = a.cols
    if a.uniform_den is not None and b.uniform_den is not None:
        den = a.uniform_den * b.uniform_den
        ad, bd = a.data, b.data
        cols = b.cols
        out: list[Rational] = []
        for i in range(a.rows):
            base = i * inner
            arow = [ad[base + k].num for k in range(inner)]
            for j in range(cols):
                s = 0
                idx = j
                for k in range(inner):
                    s += arow[k] * bd[idx].num
                    idx += cols
                out.append(Rational(s, den))
        return RationalTensor(a.rows, b.cols, out)
    out = []
    for i in range(a.rows):
        for j in range(b.cols):
            acc = ZERO
            for k in range(inner):
                acc = rat_add(acc, rat_mul(a.at(i, k), b.at(k, j)))
            out.append(acc)
    return RationalTensor(a.rows, b.cols, out)


def tensor_add(a: RationalTensor, b: RationalTensor) -> RationalTensor:
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ValueError("shape mismatch in tensor addition")
    return RationalTensor(
        a.rows, a.cols, [rat_add(x, y) for x, y in zip(a.data, b.data)]
    )


def scale_by_pow2(t: RationalTensor, k: int) -> RationalTensor:
    """Multiply every entry by 2**-k (a pure shift on the denominator)."""
    if k == 0:
        return t
    if k > 0:
        return t.map_entries(lambda q: Rational(q.num, q.den << k))
    return t.map_entries(lambda q: Rational(q.num << -k, q.den))


def write_tensor(f: TextIO, t: RationalTensor) -> None:
    """Serialize as a header line and one `row col num den` line per entry.

    Decimal text, platform independent, diff friendly.
    """
    f.write(f"shape {t.rows} {t.cols}\n")
    for i in range(t.rows):
        for j in range(t.cols):
            q = t.at(i, j)
            f.write(f"{i} {j} {q.num} {q.den}\n")


def read_tensor(f: TextIO) -> RationalTensor:
    header = f.readline().split()
    if len(header) != 3 or header[0] != "shape":
        raise ValueError("missing tensor shape header")
    rows, cols = int(header[1]), int(header[2])
    data = [ZERO] * (rows * cols)
    for _ in range(rows * cols):
        parts = f.readline().split()
        if len(parts) != 4:
            raise ValueError("truncated tensor entry line")
        i, j, num, den = (int(p) for p in parts)
        data[i * cols + j] = Rational(num, den)
    return RationalTensor(rows, cols, data)


def expand_to_common_den(t: RationalTensor, cap: int) -> RationalTensor:
    """Re-express all entries over the lcm of their denominators.

    Value-preserving; applied after grid projection so the uniform-
    denominator fast path stays available.  Left unchanged when the
    common denominator would exceed `cap`.
    """
    lcm = 1
    for q in t.data:
        g = math.gcd(lcm, q.den)
        lcm = lcm // g * q.den
        if lcm > cap:
            return t
    return RationalTensor(
        t.rows, t.cols, [Rational(q.num * (lcm // q.den), lcm) for q in t.data]
    )


def lift_uniform(values: Iterable[float], scale: int) -> list[Rational]:
    """Lift floats onto the shared denominator `scale` without reducing.

    Used where a uniform denominator matters for the fast accumulation
    path; values must be exact on the grid (asserted).
    """
    out = []
    for v in values:
        n, d = v.as_integer_ratio()
        if scale % d:
            raise ValueError(f"{v!r} is not exact on the 1/{scale} grid")
        out.append(Rational(n * (scale // d), scale))
    return out
