"""Transcendental-style operators that never leave the rational field.

Exponentials come from truncated Taylor sums, inverse square roots from
Newton-Raphson iteration, and normalization from exact moments plus the
rational inverse square root.  Accuracy is a knob (series order,
iteration tolerance) rather than a fixed format property.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    ONE,
    Rational,
    ZERO,
    floor_log2,
    rat_add,
    rat_div,
    rat_mul,
    rat_sub,
    simplify,
    to_float,
    to_rational,
)


@dataclass(frozen=True)
class TranscendConfig:
    """Accuracy knobs for the rational operators."""

    taylor_order: int = 8
    nr_tolerance: Rational = field(default_factory=lambda: Rational(1, 10**30))
    nr_max_iters: int = 64
    layernorm_epsilon: Rational = field(default_factory=lambda: ZERO)

    def __post_init__(self):
        if self.taylor_order < 1:
            raise ValueError("taylor_order must be >= 1")
        if self.nr_max_iters < 1:
            raise ValueError("nr_max_iters must be >= 1")
        if self.nr_tolerance.num <= 0:
            raise ValueError("nr_tolerance must be positive")
        if self.layernorm_epsilon.num < 0:
            raise ValueError("layernorm_epsilon must be >= 0")


class SeriesUnderflowError(ValueError):
    """A truncated exponential series evaluated to a non-positive value."""

    def __init__(self, index: int):
        super().__init__(f"series underflow at component {index}")
        self.index = index


def rat_exp(x: Rational, order: int) -> Rational:
    """Partial Taylor sum of exp(x) through the given order, exactly.

    For |x| <= 1 the truncation error is below 2/(order+1)!.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    acc = ONE
    term = ONE
    for k in range(1, order + 1):
        term = Rational(term.num * x.num, term.den * x.den * k)
        acc = rat_add(acc, term)
    return acc


def rat_softmax(z: Sequence[Rational], order: int) -> list[Rational]:
    """Softmax from truncated rational exponentials; the components sum
    to exactly one.

    Inputs are shifted by their maximum before expansion, which keeps the
    series argument in (-inf, 0] and leaves the exact ratios unchanged.
    """
    if not z:
        raise ValueError("softmax over an empty vector")
    m = z[0]
    for v in z[1:]:
        if v > m:
            m = v
    exps = []
    for i, v in enumerate(z):
        e = rat_exp(rat_sub(v, m), order)
        if e.num <= 0:
            raise SeriesUnderflowError(i)
        exps.append(e)
    total = exps[0]
    for e in exps[1:]:
        total = rat_add(total, e)
    return [rat_div(e, total) for e in exps]


def _power_of_two_seed(a: Rational) -> Rational:
    # 2**(-ceil(e/2)) with e = floor(log2 a) puts a*y0^2 in [1/2, 2]
    e = floor_log2(a)
    h = -((e + 1) // 2)
    if h >= 0:
        return Rational(1 << h, 1, reduced=True)
    return Rational(1, 1 << -h, reduced=True)


def inv_sqrt_trace(a: Rational, cfg: TranscendConfig) -> tuple[Rational, list[Rational]]:
    """Newton-Raphson inverse square root with per-iteration residuals.

    Returns (y, residuals) where every residual is |a*y^2 - 1| after the
    corresponding iteration.  Raises on a <= 0, and on divergence after
    one reseed.
    """
    if a.num <= 0:
        raise ValueError("inverse square root requires a positive input")
    y = _float_seed(a)
    if _outside_basin(a, y):
        y = _power_of_two_seed(a)
        if _outside_basin(a, y):
            raise ArithmeticError("inverse-square-root seed diverged after reseed")
    residuals: list[Rational] = []
    tol = cfg.nr_tolerance
    for _ in range(cfg.nr_max_iters):
        r = _residual(a, y)
        residuals.append(r)
        if r <= tol:
            return y, residuals
        # y <- y * (3 - a*y^2) / 2, simplified: iterate bit-width is
        # cubic in y's otherwise
        ay2 = rat_mul(a, rat_mul(y, y))
        y = simplify(rat_mul(y, Rational(3 * ay2.den - ay2.num, 2 * ay2.den)))
    r = _residual(a, y)
    residuals.append(r)
    if r <= tol:
        return y, residuals
    raise ArithmeticError("inverse square root did not converge within nr_max_iters")


def rat_inv_sqrt(a: Rational, cfg: TranscendConfig) -> Rational:
    """y in Q with |a*y^2 - 1| <= cfg.nr_tolerance; quadratic convergence."""
    return inv_sqrt_trace(a, cfg)[0]


def _float_seed(a: Rational) -> Rational:
    fa = to_float(a)
    if fa <= 0.0 or fa != fa or fa == float("inf"):
        return _power_of_two_seed(a)
    return to_rational(fa**-0.5, 1 << 53)


def _outside_basin(a: Rational, y: Rational) -> bool:
    if y.num <= 0:
        return True
    ay2 = rat_mul(a, rat_mul(y, y))
    return ay2.num >= 3 * ay2.den  # a*y^2 >= 3 diverges


def _residual(a: Rational, y: Rational) -> Rational:
    ay2 = rat_mul(a, rat_mul(y, y))
    return simplify(abs(rat_sub(ay2, ONE)))


def rat_layernorm(v: Sequence[Rational], cfg: TranscendConfig) -> list[Rational]:
    """Normalize to exactly zero mean and approximately unit variance.

    Mean and population variance are exact; only the inverse square root
    carries the Newton-Raphson tolerance.
    """
    n = len(v)
    if n < 1:
        raise ValueError("layernorm over an empty vector")
    total = ZERO
    for x in v:
        total = rat_add(total, x)
    mean = simplify(Rational(total.num, total.den * n))
    devs = [rat_sub(x, mean) for x in v]
    var_sum = ZERO
    for d in devs:
        var_sum = rat_add(var_sum, rat_mul(d, d))
    variance = simplify(Rational(var_sum.num, var_sum.den * n))
    scale_arg = rat_add(variance, cfg.layernorm_epsilon)
    if scale_arg.num == 0:
        raise ValueError("degenerate input: zero variance and zero epsilon")
    y = rat_inv_sqrt(scale_arg, cfg)
    return [rat_mul(d, y) for d in devs]


def rat_relu(q: Rational) -> Rational:
    """max(0, q) as a sign test on the numerator (den > 0 by invariant)."""
    return q if q.num > 0 else ZERO


def attention_shift(d: int) -> int:
    """Power-of-two exponent k approximating sqrt(d): scale by 2**-k."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    # round(log2(sqrt(d))) without floating point: compare d against
    # 2**(2k+1) midpoints in the log domain
    k = (d.bit_length() - 1) // 2
    # candidates k and k+1; pick the closer of 4**k and 4**(k+1) to d
    # in log space: boundary at 2**(2k+1)
    if d >= 1 << (2 * k + 1):
        k += 1
    return k
