"""Precision-failure experiments: exact arithmetic vs emulated floats.

Every experiment is a pure function of its configuration and seed and
writes one CSV file with a fixed column set and deterministic row order
(regime-major, step-minor).  The exact trajectory is its own reference,
so the exact regime's error column is zero by construction and the
float regimes are measured against it with exact subtraction.

Floats are serialized with 17 significant digits; fractions as
"num/den" decimal strings.
"""

from __future__ import annotations

import math
import random
from typing import NamedTuple, Sequence

from .core import (
    BitReport,
    ONE,
    Rational,
    ZERO,
    bit_report,
    bit_width,
    format_rational,
    from_float,
    rat_mul,
    rat_sub,
    rational_approx_detail,
    simplify,
    sum_exact,
    to_float,
)
from .eiu import EiuConfig, simulate_pipeline
from .floatemu import (
    BF16,
    EXACT,
    FP32,
    PrecisionRegime,
    emulated_op,
    reduce_ordered,
    round_rational_to,
    round_to,
)
from .integrity import M1, M2, dmr_check, inject_fault, residues
from .net import (
    InferenceConfig,
    RingConfig,
    init_weights,
    run_inference,
    the_ring,
)
from .tensor import RationalTensor, expand_to_common_den, lift_uniform, rational_matmul

REGIME_SEQUENCE = (BF16, FP32, EXACT)

RECORD_HEADER = ["experiment", "regime", "step", "error", "bits", "seed", "metadata", "flag"]


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


class ExperimentOutput(NamedTuple):
    name: str
    header: list[str]
    rows: list[list[str]]
    meta: dict[str, str]


def _select_regimes(names: Sequence[str]) -> list[PrecisionRegime]:
    wanted = {n.upper() for n in names}
    unknown = wanted - {r.name for r in REGIME_SEQUENCE}
    if unknown:
        raise ValueError(f"unknown regimes: {sorted(unknown)}")
    return [r for r in REGIME_SEQUENCE if r.name in wanted]


def _flag_of(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "overflow"
    return ""


def _exact_abs_diff(value: float, reference: Rational) -> float:
    """|value - reference| with the subtraction done exactly."""
    return to_float(abs(rat_sub(from_float(value), reference)))


# ----------------------------------------------------------------------
# logistic map
# ----------------------------------------------------------------------


class LogisticParams(NamedTuple):
    r: Rational
    x0: Rational
    steps: int
    survival_threshold: Rational
    ring_interval: int
    ring_d_max: int
    ring_eps: Rational
    regimes: Sequence[str]
    seed: int


def _logistic_exact_path(p: LogisticParams) -> list[Rational]:
    """Exact trajectory with periodic grid re-grounding.

    Bit-width doubles per chaotic step, so an unbounded exact run is
    physically impossible; the grid projection every `ring_interval`
    steps is the mechanism that keeps the run exact-in-Q and finite.
    """
    xs = [p.x0]
    x = p.x0
    for t in range(1, p.steps + 1):
        x = rat_mul(rat_mul(p.r, x), rat_sub(ONE, x))
        if t % p.ring_interval == 0:
            x = simplify(rational_approx_detail(x, p.ring_eps, p.ring_d_max).value)
        xs.append(x)
    return xs


def _logistic_float_path(p: LogisticParams, regime: PrecisionRegime) -> list[float]:
    # one rounding from the exact parameters into the regime
    r = round_rational_to(p.r, regime)
    x = round_rational_to(p.x0, regime)
    xs = [x]
    for _ in range(p.steps):
        rx = emulated_op("mul", r, x, regime)
        one_minus = emulated_op("add", 1.0, -x, regime)
        x = emulated_op("mul", rx, one_minus, regime)
        xs.append(x)
    return xs


def run_logistic(p: LogisticParams) -> ExperimentOutput:
    if not (ZERO < p.x0 < ONE):
        raise ValueError("x0 must lie strictly inside (0, 1)")
    exact = _logistic_exact_path(p)
    meta_str = (
        f"r={format_rational(p.r)};x0={format_rational(p.x0)};steps={p.steps};"
        f"ring_k={p.ring_interval};ring_dmax={p.ring_d_max};"
        f"survival={format_rational(p.survival_threshold)}"
    )
    rows: list[list[str]] = []
    survival: dict[str, int | None] = {}
    thr = p.survival_threshold
    for regime in _select_regimes(p.regimes):
        if regime is EXACT:
            errors = [0.0] * (p.steps + 1)
            bits = [bit_report(x).total_bits for x in exact]
            surv = None
        else:
            path = _logistic_float_path(p, regime)
            exact_diffs = [
                abs(rat_sub(from_float(v), x)) for v, x in zip(path, exact)
            ]
            errors = [to_float(d) for d in exact_diffs]
            bits = [0] * (p.steps + 1)
            surv = next((t for t, d in enumerate(exact_diffs) if d > thr), None)
        survival[regime.name] = surv
        for t, (e, b) in enumerate(zip(errors, bits)):
            rows.append(
                [
                    "logistic",
                    regime.name,
                    str(t),
                    fmt_float(e),
                    str(b),
                    str(p.seed),
                    meta_str,
                    _flag_of(e),
                    "" if surv is None else str(surv),
                ]
            )
    meta = {
        f"survival_step.{name.lower()}": ("none" if s is None else str(s))
        for name, s in survival.items()
    }
    return ExperimentOutput(
        "logistic", RECORD_HEADER + ["survival_step"], rows, meta
    )


# ----------------------------------------------------------------------
# linear-recurrence drift
# ----------------------------------------------------------------------


class DriftParams(NamedTuple):
    dim: int
    steps: int
    scale_bits: int
    sigma_target: float
    regimes: Sequence[str]
    seed: int


def _rotation_matrix(dim: int, rng: random.Random) -> list[list[float]]:
    # product of random plane rotations: an isometry with dense mixing,
    # built in plain host floats (deterministic: no BLAS involved)
    w = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    for _ in range(6 * dim):
        i, j = rng.sample(range(dim), 2)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        ri = w[i]
        rj = w[j]
        w[i] = [c * a - s * b for a, b in zip(ri, rj)]
        w[j] = [s * a + c * b for a, b in zip(ri, rj)]
    return w


def _estimate_sigma_max(w: list[list[float]], iters: int = 200) -> float:
    dim = len(w)
    v = [1.0 / math.sqrt(dim)] * dim
    wt = [[w[i][j] for i in range(dim)] for j in range(dim)]
    for _ in range(iters):
        wv = [sum(row[k] * v[k] for k in range(dim)) for row in w]
        u = [sum(row[k] * wv[k] for k in range(dim)) for row in wt]
        norm = math.sqrt(sum(x * x for x in u))
        v = [x / norm for x in u]
    wv = [sum(row[k] * v[k] for k in range(dim)) for row in w]
    return math.sqrt(sum(x * x for x in wv))


def _div_round_nearest(n: int, d: int) -> int:
    q, r = divmod(n, d)
    if 2 * r > d or (2 * r == d and q & 1):
        return q + 1
    return q


def drift_matrix(dim: int, scale_bits: int, sigma_target: float, seed: int) -> RationalTensor:
    """Seeded dyadic matrix whose top singular value sits in [0.99, 1.01]."""
    rng = random.Random(f"drift-matrix:{seed}")
    base = _rotation_matrix(dim, rng)
    scale = 1 << scale_bits
    target = sigma_target
    for _ in range(4):
        scaled = [[x * target for x in row] for row in base]
        # round each entry onto the 2**-scale_bits grid
        lifted_nums = [[_lift_num(x, scale) for x in row] for row in scaled]
        floats = [[n / scale for n in row] for row in lifted_nums]
        sigma = _estimate_sigma_max(floats)
        if 0.99 <= sigma <= 1.01:
            data = [
                Rational(n, scale) for row in lifted_nums for n in row
            ]
            return RationalTensor(dim, dim, data)
        target *= sigma_target / sigma
    raise ArithmeticError("could not normalize the drift matrix into the band")


def _lift_num(x: float, scale: int) -> int:
    n, d = x.as_integer_ratio()
    return _div_round_nearest(n * scale, d)


def _needle_start(dim: int, rng: random.Random, grid_bits: int) -> list[float]:
    # magnitudes bounded away from zero so the grid lift stays exact
    out = []
    for _ in range(dim):
        v = rng.uniform(0.1, 1.0) * rng.choice((-1.0, 1.0))
        q = _div_round_nearest(*_scaled_ratio(v, 1 << grid_bits))
        out.append(q / (1 << grid_bits))
    return out


def _scaled_ratio(x: float, scale: int) -> tuple[int, int]:
    n, d = x.as_integer_ratio()
    return n * scale, d


def run_drift(p: DriftParams) -> ExperimentOutput:
    if p.dim < 2:
        raise ValueError("drift needs dimension >= 2")
    w = drift_matrix(p.dim, p.scale_bits, p.sigma_target, p.seed)
    rng = random.Random(f"drift-start:{p.seed}")
    # the start lives on a grid coarse enough to be exact in every regime
    h0_float = _needle_start(p.dim, rng, 8)
    h0 = RationalTensor(p.dim, 1, lift_uniform(h0_float, 1 << p.scale_bits))

    exact_states = [h0]
    h = h0
    for _ in range(p.steps):
        h = rational_matmul(w, h)
        exact_states.append(h)

    meta_str = (
        f"dim={p.dim};steps={p.steps};scale_bits={p.scale_bits};"
        f"sigma_target={fmt_float(p.sigma_target)}"
    )
    rows: list[list[str]] = []
    crossings: dict[str, int | None] = {}
    for regime in _select_regimes(p.regimes):
        if regime is EXACT:
            errors = [0.0] * (p.steps + 1)
            bits = [s.max_bits for s in exact_states]
        else:
            # the regime stores the weights in its own format: weight
            # quantization is part of the regime's error budget
            w_float = [
                [round_to(to_float(w.at(i, j)), regime) for j in range(p.dim)]
                for i in range(p.dim)
            ]
            hf = list(h0_float)
            errors = [0.0]
            bits = [0] * (p.steps + 1)
            for t in range(1, p.steps + 1):
                nxt = []
                for i in range(p.dim):
                    acc = None
                    row = w_float[i]
                    for j in range(p.dim):
                        prod = emulated_op("mul", row[j], hf[j], regime)
                        acc = prod if acc is None else emulated_op("add", acc, prod, regime)
                    nxt.append(acc)
                hf = nxt
                exact_h = exact_states[t]
                err = max(
                    _exact_abs_diff(hf[i], exact_h.at(i, 0)) for i in range(p.dim)
                )
                errors.append(err)
        cross = next((t for t, e in enumerate(errors) if e > 1e-4), None)
        crossings[regime.name] = cross
        for t, e in enumerate(errors):
            rows.append(
                [
                    "drift",
                    regime.name,
                    str(t),
                    fmt_float(e),
                    str(bits[t]),
                    str(p.seed),
                    meta_str,
                    _flag_of(e),
                ]
            )
    meta = {
        f"first_exceeds_1e-4.{name.lower()}": ("none" if c is None else str(c))
        for name, c in crossings.items()
    }
    return ExperimentOutput("drift", RECORD_HEADER, rows, meta)


# ----------------------------------------------------------------------
# derivative-chain fidelity
# ----------------------------------------------------------------------


class GradientParams(NamedTuple):
    depth: int
    r: Rational
    x0: Rational
    ring_interval: int
    ring_d_max: int
    ring_eps: Rational
    regimes: Sequence[str]
    seed: int


def run_gradient(p: GradientParams) -> ExperimentOutput:
    """Depth-L derivative of the iterated map: the product of r*(1-2*x_t).

    Each regime accumulates the factor product along its own trajectory;
    the exact product is the reference.
    """
    if p.depth < 1:
        raise ValueError("gradient needs depth >= 1")
    lp = LogisticParams(
        p.r, p.x0, p.depth, ONE, p.ring_interval, p.ring_d_max, p.ring_eps, (), p.seed
    )
    exact_x = _logistic_exact_path(lp)
    two = Rational(2)
    exact_products: list[Rational] = []
    prod = ONE
    for t in range(p.depth):
        factor = rat_mul(p.r, rat_sub(ONE, rat_mul(two, exact_x[t])))
        prod = rat_mul(prod, factor)
        exact_products.append(prod)

    meta_str = (
        f"r={format_rational(p.r)};x0={format_rational(p.x0)};depth={p.depth};"
        f"ring_k={p.ring_interval};ring_dmax={p.ring_d_max}"
    )
    rows: list[list[str]] = []
    for regime in _select_regimes(p.regimes):
        if regime is EXACT:
            devs = [0.0] * p.depth
            bits = [bit_report(q).total_bits for q in exact_products]
        else:
            bits = [0] * p.depth
            devs = []
            x = round_rational_to(p.x0, regime)
            r = round_rational_to(p.r, regime)
            prod_f = round_to(1.0, regime)
            for t in range(p.depth):
                twox = emulated_op("mul", 2.0, x, regime)
                factor = emulated_op("mul", r, emulated_op("add", 1.0, -twox, regime), regime)
                prod_f = emulated_op("mul", prod_f, factor, regime)
                ref = exact_products[t]
                if not math.isfinite(prod_f) or ref.num == 0:
                    devs.append(math.inf)
                else:
                    diff = abs(rat_sub(from_float(prod_f), ref))
                    devs.append(to_float(rat_mul(diff, Rational(ref.den, abs(ref.num)))))
                # advance the regime's own trajectory
                rx = emulated_op("mul", r, x, regime)
                x = emulated_op("mul", rx, emulated_op("add", 1.0, -x, regime), regime)
        for t in range(p.depth):
            e = devs[t]
            rows.append(
                [
                    "gradient",
                    regime.name,
                    str(t + 1),
                    fmt_float(e),
                    str(bits[t]),
                    str(p.seed),
                    meta_str,
                    _flag_of(e),
                ]
            )
    return ExperimentOutput("gradient", RECORD_HEADER, rows, meta={})


# ----------------------------------------------------------------------
# long-context recall
# ----------------------------------------------------------------------


class NeedleParams(NamedTuple):
    dim: int
    lengths: Sequence[int]
    ring_interval: int
    ring_d_max: int
    ring_eps: Rational
    lift_bits: int
    regimes: Sequence[str]
    seed: int


class NeedleSystem(NamedTuple):
    forward: RationalTensor  # I + N/16, N nilpotent of index 3
    inverse: RationalTensor  # I - N/16 + N^2/256
    start: RationalTensor  # column vector on the 2**-lift_bits grid
    start_floats: list[float]


def _det_exact(rows: list[list]) -> "Fraction":
    """Exact determinant by fraction-free elimination over Fraction."""
    from fractions import Fraction

    n = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def build_needle_system(p: NeedleParams) -> NeedleSystem:
    """Unipotent dyadic propagator: exact powers keep denominators inside
    the grid bound while float baselines accumulate genuine rounding."""
    dim = p.dim
    for attempt in range(4):
        rng = random.Random(f"needle:{p.seed}:{attempt}" if attempt else f"needle:{p.seed}")
        cut1, cut2 = dim // 3, 2 * dim // 3
        tiers = (range(0, cut1), range(cut1, cut2), range(cut2, dim))
        nonzero = [k for k in range(-8, 9) if k]
        n_entries = [[0] * dim for _ in range(dim)]
        for i in tiers[1]:
            for j in tiers[0]:
                n_entries[i][j] = rng.choice(nonzero)
        for i in tiers[2]:
            for j in tiers[1]:
                n_entries[i][j] = rng.choice(nonzero)
        n2 = [
            [sum(n_entries[i][k] * n_entries[k][j] for k in range(dim)) for j in range(dim)]
            for i in range(dim)
        ]
        fwd = RationalTensor(
            dim,
            dim,
            [
                Rational(16 * (i == j) + n_entries[i][j], 16)
                for i in range(dim)
                for j in range(dim)
            ],
        )
        # invertibility checked exactly (the unipotent construction has
        # determinant one, but the contract is on the value, not the
        # construction); a singular draw would reseed
        from fractions import Fraction as _F

        det = _det_exact([[_F(q.num, q.den) for q in fwd.row(i)] for i in range(dim)])
        if det == 0:  # pragma: no cover - unreachable for unipotent draws
            continue
        inv = RationalTensor(
            dim,
            dim,
            [
                Rational(256 * (i == j) - 16 * n_entries[i][j] + n2[i][j], 256)
                for i in range(dim)
                for j in range(dim)
            ],
        )
        start_floats = _needle_start(dim, rng, p.lift_bits)
        start = RationalTensor(dim, 1, lift_uniform(start_floats, 1 << p.lift_bits))
        return NeedleSystem(fwd, inv, start, start_floats)
    raise ArithmeticError("could not draw an invertible propagator")


def _matrix_power(m: RationalTensor, e: int) -> RationalTensor:
    acc = RationalTensor.identity(m.rows)
    base = m
    while e:
        if e & 1:
            acc = rational_matmul(acc, base).simplify_entries()
        base = rational_matmul(base, base).simplify_entries()
        e >>= 1
    return acc


def run_needle(p: NeedleParams) -> ExperimentOutput:
    if p.dim < 3:
        raise ValueError("needle needs dimension >= 3 (three mixing tiers)")
    if not p.lengths or min(p.lengths) < 0:
        raise ValueError("needle lengths must be non-negative")
    system = build_needle_system(p)
    lengths = sorted(p.lengths)
    horizon = lengths[-1]
    ring_cfg = RingConfig(
        interval=p.ring_interval, d_max=p.ring_d_max, eps=p.ring_eps
    )
    fwd_float = system.forward.to_float_rows()
    inverses = {length: _matrix_power(system.inverse, length) for length in lengths}

    meta_str = (
        f"dim={p.dim};lengths={'|'.join(str(x) for x in lengths)};"
        f"ring_k={p.ring_interval};ring_dmax={p.ring_d_max};lift_bits={p.lift_bits}"
    )
    rows: list[list[str]] = []
    ring_misses = 0
    for regime in _select_regimes(p.regimes):
        if regime is EXACT:
            h = system.start
            grid_scale = p.ring_d_max
            results: dict[int, tuple[float, int]] = {}
            if 0 in inverses:
                results[0] = (0.0, h.max_bits)
            for t in range(1, horizon + 1):
                h = rational_matmul(system.forward, h)
                if t % p.ring_interval == 0:
                    h, stats = the_ring(h, ring_cfg)
                    ring_misses += stats["tolerance_misses"]
                    # shared denominator keeps the integer matmul path hot
                    h = expand_to_common_den(h, grid_scale << 8)
                if t in inverses:
                    retrieved = rational_matmul(inverses[t], h)
                    err = max(
                        to_float(abs(rat_sub(retrieved.at(i, 0), system.start.at(i, 0))))
                        for i in range(p.dim)
                    )
                    results[t] = (err, h.max_bits)
        else:
            hf = list(system.start_floats)
            results = {}
            if 0 in inverses:
                lifted = RationalTensor(p.dim, 1, [from_float(v) for v in hf])
                err0 = max(
                    to_float(abs(rat_sub(lifted.at(i, 0), system.start.at(i, 0))))
                    for i in range(p.dim)
                )
                results[0] = (err0, 0)
            for t in range(1, horizon + 1):
                nxt = []
                for i in range(p.dim):
                    acc = None
                    row = fwd_float[i]
                    for j in range(p.dim):
                        if row[j] == 0.0:
                            continue  # adding an exact zero never rounds
                        prod = emulated_op("mul", row[j], hf[j], regime)
                        acc = prod if acc is None else emulated_op("add", acc, prod, regime)
                    nxt.append(acc if acc is not None else 0.0)
                hf = nxt
                if t in inverses:
                    lifted = RationalTensor(
                        p.dim, 1, [from_float(v) for v in hf]
                    )
                    retrieved = rational_matmul(inverses[t], lifted)
                    err = max(
                        to_float(abs(rat_sub(retrieved.at(i, 0), system.start.at(i, 0))))
                        for i in range(p.dim)
                    )
                    results[t] = (err, 0)
        for length in lengths:
            err, bits = results[length]
            rows.append(
                [
                    "needle",
                    regime.name,
                    str(length),
                    fmt_float(err),
                    str(bits),
                    str(p.seed),
                    meta_str,
                    _flag_of(err),
                ]
            )
    meta = {"ring_tolerance_misses": str(ring_misses)}
    return ExperimentOutput("needle", RECORD_HEADER, rows, meta)


# ----------------------------------------------------------------------
# width scaling
# ----------------------------------------------------------------------


class ScaleParams(NamedTuple):
    widths: Sequence[int]
    trials: int
    regimes: Sequence[str]
    seed: int


def run_scale(p: ScaleParams) -> ExperimentOutput:
    """Sequential summation error as a function of vector width."""
    if not p.widths or min(p.widths) < 2:
        raise ValueError("widths must be >= 2")
    if p.trials < 1:
        raise ValueError("trials must be >= 1")
    meta_str = f"widths={'|'.join(str(w) for w in sorted(p.widths))};trials={p.trials}"
    rows: list[list[str]] = []
    widths = sorted(p.widths)
    drawn: dict[tuple[int, int], list[float]] = {}
    exact_sums: dict[tuple[int, int], Rational] = {}
    for width in widths:
        for trial in range(p.trials):
            rng = random.Random(f"scale:{p.seed}:{width}:{trial}")
            vals = [round_to(rng.uniform(-1.0, 1.0), BF16) for _ in range(width)]
            drawn[(width, trial)] = vals
            exact_sums[(width, trial)] = sum_exact(from_float(v) for v in vals)
    for regime in _select_regimes(p.regimes):
        for width in widths:
            errs = []
            max_bits = 0
            for trial in range(p.trials):
                vals = drawn[(width, trial)]
                ref = exact_sums[(width, trial)]
                if regime is EXACT:
                    errs.append(0.0)
                    max_bits = max(max_bits, bit_report(ref).total_bits)
                else:
                    acc = vals[0]
                    for v in vals[1:]:
                        acc = emulated_op("add", acc, v, regime)
                    errs.append(_exact_abs_diff(acc, ref))
            mean = sum(errs) / len(errs)
            rows.append(
                [
                    "scale",
                    regime.name,
                    str(width),
                    fmt_float(mean),
                    str(max_bits),
                    str(p.seed),
                    meta_str,
                    _flag_of(mean),
                    str(p.trials),
                ]
            )
    return ExperimentOutput("scale", RECORD_HEADER + ["trials"], rows, meta={})


# ----------------------------------------------------------------------
# ring cost (bit-width boundedness)
# ----------------------------------------------------------------------


class RingCostParams(NamedTuple):
    steps: int
    interval: int
    d_model: int
    d_ff: int
    vocab: int
    taylor_order: int
    d_max: int
    eps: Rational
    scale_bits: int
    seed: int


def run_ring_cost(p: RingCostParams) -> ExperimentOutput:
    from .net import ring_bits_bound
    from .transcend import TranscendConfig

    if p.steps < p.interval:
        raise ValueError("need at least one full re-grounding interval")

    cfg = InferenceConfig(
        depth=p.steps,
        d_model=p.d_model,
        d_ff=p.d_ff,
        seq_len=1,
        vocab=p.vocab,
        scale_bits=p.scale_bits,
        seed=p.seed,
        taylor=TranscendConfig(taylor_order=p.taylor_order),
        ring=RingConfig(interval=p.interval, d_max=p.d_max, eps=p.eps),
    )
    weights = init_weights(cfg)
    tokens = [p.seed % p.vocab] * cfg.seq_len
    with_ring = run_inference(tokens, cfg, weights)
    without_ring = run_inference(tokens, cfg.with_ring(False), weights)

    on_bits = [r.total_bits for r in with_ring.trace]
    off_bits = [r.total_bits for r in without_ring.trace]
    alpha_obs = max(
        (on_bits[t] - on_bits[t - 1] for t in range(1, len(on_bits))), default=0
    )
    b_ring = ring_bits_bound(p.d_max, with_ring.ring_stats["max_int_bits"])
    bound = b_ring + p.interval * alpha_obs
    sharper = b_ring + (p.interval - 1) * alpha_obs
    peak = max(on_bits)

    meta_str = (
        f"steps={p.steps};ring_k={p.interval};d_model={p.d_model};"
        f"taylor_n={p.taylor_order};ring_dmax={p.d_max}"
    )
    rows: list[list[str]] = []
    for label, bits in (("on", on_bits), ("off", off_bits)):
        for t, b in enumerate(bits):
            rows.append(
                [
                    "ringcost",
                    "EXACT",
                    str(t),
                    fmt_float(0.0),
                    str(b),
                    str(p.seed),
                    meta_str,
                    "",
                    label,
                ]
            )
    meta = {
        "alpha_obs": str(alpha_obs),
        "b_ring": str(b_ring),
        "bound_k_alpha": str(bound),
        "peak_bits_ring_on": str(peak),
        "bound_holds": str(peak <= bound),
        "sharper_bound_k_minus_1_holds": str(peak <= sharper),
        "bits_at_2k_ring_on": str(on_bits[min(2 * p.interval, p.steps)]),
        "bits_at_2k_ring_off": str(off_bits[min(2 * p.interval, p.steps)]),
    }
    return ExperimentOutput("ringcost", RECORD_HEADER + ["ring"], rows, meta)


# ----------------------------------------------------------------------
# reduction-order sensitivity
# ----------------------------------------------------------------------


class AssociativityParams(NamedTuple):
    n: int
    trials: int
    regimes: Sequence[str]
    seed: int


ADVERSARIAL_PREFIX = (1.0, 2.0**-8, 2.0**-8, -1.0)


def run_associativity(p: AssociativityParams) -> ExperimentOutput:
    if p.n < 3:
        raise ValueError("need at least three addends")
    rng = random.Random(f"assoc:{p.seed}")
    values = list(ADVERSARIAL_PREFIX)[: p.n]
    while len(values) < p.n:
        values.append(round_to(rng.uniform(-1.0, 1.0), BF16))
    orders = []
    base = list(range(p.n))
    for trial in range(p.trials):
        order = list(base)
        if trial:
            rng.shuffle(order)
        orders.append(order)
    exact_ref = sum_exact(from_float(v) for v in values)
    ref_float = to_float(exact_ref)

    meta_str = f"n={p.n};trials={p.trials}"
    rows: list[list[str]] = []
    distinct_counts: dict[str, int] = {}
    for regime in _select_regimes(p.regimes):
        seen: set[float] = set()
        for trial, order in enumerate(orders):
            res = reduce_ordered(values, order, regime)
            seen.add(res)
            err = abs(res - ref_float) if regime is not EXACT else 0.0
            rows.append(
                [
                    "associativity",
                    regime.name,
                    str(trial),
                    fmt_float(err),
                    "0",
                    str(p.seed),
                    meta_str,
                    _flag_of(err),
                    fmt_float(res),
                    str(len(seen)),
                ]
            )
        distinct_counts[regime.name] = len(seen)
    meta = {
        f"distinct_results.{name.lower()}": str(c) for name, c in distinct_counts.items()
    }
    return ExperimentOutput(
        "associativity", RECORD_HEADER + ["result", "distinct_so_far"], rows, meta
    )


# ----------------------------------------------------------------------
# dual-modular-redundancy coverage
# ----------------------------------------------------------------------


class DmrParams(NamedTuple):
    bursts: int
    window: int
    min_flips: int
    max_flips: int
    operand_bits: int
    seed: int


DMR_HEADER = ["trial", "kind", "bits_flipped", "error_mod_m1", "error_mod_m2", "detected"]


def run_dmr(p: DmrParams) -> ExperimentOutput:
    rng = random.Random(f"dmr:{p.seed}")
    a = rng.getrandbits(p.operand_bits) | 1
    b = rng.getrandbits(p.operand_bits) | 1
    products = {"mul": a * b, "add": a + b}
    rows: list[list[str]] = []
    trial = 0
    # exhaustive single-bit flips across twice the operand width
    c = products["mul"]
    for pos in range(2 * p.operand_bits):
        corrupted = inject_fault(c, (pos,))
        err = corrupted - c
        rep = dmr_check(a, b, corrupted, "mul")
        er = residues(abs(err))
        rows.append(
            [str(trial), "single-mul", "1", str(er.r1), str(er.r2), str(int(rep.detected))]
        )
        trial += 1
    # random multi-bit bursts inside a sliding window
    undetected_bursts = 0
    for i in range(p.bursts):
        kind = "mul" if i % 2 == 0 else "add"
        c = products[kind]
        k = rng.randint(p.min_flips, p.max_flips)
        start = rng.randrange(0, max(1, 2 * p.operand_bits - p.window))
        positions = rng.sample(range(start, start + p.window), k)
        corrupted = inject_fault(c, positions)
        err = corrupted - c
        rep = dmr_check(a, b, corrupted, kind)
        if not rep.detected:
            undetected_bursts += 1
        er = residues(abs(err))
        rows.append(
            [
                str(trial),
                f"burst-{kind}",
                str(k),
                str(er.r1),
                str(er.r2),
                str(int(rep.detected)),
            ]
        )
        trial += 1
    # the designed collision: an error equal to the moduli product
    c = products["mul"]
    corrupted = c + M1 * M2
    rep = dmr_check(a, b, corrupted, "mul")
    flips = bin(c ^ corrupted).count("1")
    rows.append(
        [str(trial), "designed-collision", str(flips), "0", "0", str(int(rep.detected))]
    )
    meta = {
        "undetected_bursts": str(undetected_bursts),
        "designed_collision_detected": str(bool(rep.detected)),
    }
    return ExperimentOutput("dmr", DMR_HEADER, rows, meta)


# ----------------------------------------------------------------------
# lazy-reduction headroom / pipeline cost
# ----------------------------------------------------------------------


class PipelineParams(NamedTuple):
    dim: int
    steps: int
    register_bits: int
    gcd_rate: int
    matmul_cycles: int
    queue_depth: int
    weight_scale_bits: int
    seed: int


PIPELINE_HEADER = ["step", "live_bits", "pending_jobs", "stalled", "reduced_this_step"]


def build_headroom_trace(p: PipelineParams) -> list:
    """Bit trace of a matmul-only recurrence on 8-bit-significand weights.

    Weights and state are dyadic, so the denominator is a power of two
    the whole run; an integer datapath with shifters stores it as a
    shift count, and the recorded denominator bits are the bits of that
    count.  Numerator growth per step is the weight significand width
    plus the accumulation's log2(dim) carry headroom.
    """
    from .core import BitReport

    rng = random.Random(f"pipeline:{p.seed}")
    dim = p.dim
    w = [
        [rng.choice((-1, 1)) * rng.randrange(128, 256) for _ in range(dim)]
        for _ in range(dim)
    ]
    h = [
        _div_round_nearest(*_scaled_ratio(round_to(rng.uniform(-1.0, 1.0), BF16), 1 << 16))
        or 1
        for _ in range(dim)
    ]
    den_exp = 16
    trace = []
    nb = max(bit_width(x) for x in h)
    trace.append(BitReport(nb, bit_width(den_exp), nb + bit_width(den_exp)))
    for _ in range(p.steps):
        h = [sum(w[i][j] * h[j] for j in range(dim)) for i in range(dim)]
        den_exp += p.weight_scale_bits
        nb = max(bit_width(x) for x in h)
        db = bit_width(den_exp)
        trace.append(BitReport(nb, db, nb + db))
    return trace


def run_pipeline(p: PipelineParams) -> ExperimentOutput:
    trace = build_headroom_trace(p)
    cfg = EiuConfig(
        register_bits=p.register_bits,
        gcd_bits_per_cycle=p.gcd_rate,
        matmul_cycles_per_step=p.matmul_cycles,
        queue_depth=p.queue_depth,
    )
    stats, steps = simulate_pipeline(trace, cfg)
    first_trigger = next(
        (s.step for s in steps if s.pending_jobs > 0 or s.reduced_this_step), None
    )
    headroom = (first_trigger - 1) if first_trigger is not None else stats.steps_executed
    rows = [
        [str(s.step), str(s.live_bits), str(s.pending_jobs), str(s.stalled), str(s.reduced_this_step)]
        for s in steps
    ]
    # sweep the reducer rate for the smallest stall-free setting
    no_stall_rate = None
    for rate in (1, 2, 4, 8, 16, 32, 64, 128, 256):
        st, _ = simulate_pipeline(trace, EiuConfig(
            register_bits=p.register_bits,
            gcd_bits_per_cycle=rate,
            matmul_cycles_per_step=p.matmul_cycles,
            queue_depth=p.queue_depth,
        ))
        if st.stall_cycles == 0 and st.saturation_events == 0:
            no_stall_rate = rate
            break
    meta = {
        "steps_before_first_trigger": str(headroom),
        "reductions_triggered": str(stats.reductions_triggered),
        "stall_cycles": str(stats.stall_cycles),
        "saturation_events": str(stats.saturation_events),
        "peak_bits": str(stats.peak_bits),
        "min_stall_free_gcd_rate": str(no_stall_rate),
    }
    return ExperimentOutput("pipeline", PIPELINE_HEADER, rows, meta)
