"""Recurrent exact-rational transformer with periodic grid re-grounding.

The state evolves in exact arithmetic (attention, feed-forward, lossless
residual) and is periodically projected back onto a bounded-denominator
grid, which resets the representation's bit-width without leaving the
rational field.  A commitment-style loss and a straight-through
projection make the grid compatible with gradient training loops.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

from .core import (
    BitReport,
    Rational,
    bit_width,
    from_float,
    rational_approx_detail,
    simplify,
    to_float,
    to_rational,
)
from .floatemu import BF16, round_to
from .tensor import (
    RationalTensor,
    expand_to_common_den,
    rational_matmul,
    scale_by_pow2,
    tensor_add,
)
from .transcend import TranscendConfig, attention_shift, rat_relu, rat_softmax


@dataclass(frozen=True)
class RingConfig:
    """Grid projection settings: interval, denominator bound, tolerance."""

    interval: int = 50
    d_max: int = 1 << 16
    eps: Rational = field(default_factory=lambda: Rational(1, 10**16))
    denoiser: str = "identity"

    def __post_init__(self):
        if self.interval < 1:
            raise ValueError("ring interval must be >= 1")
        if self.d_max < 1:
            raise ValueError("ring denominator bound must be >= 1")
        if self.eps.num <= 0:
            raise ValueError("ring eps must be positive")
        if self.denoiser not in ("identity", "round-through-float"):
            raise ValueError(f"unknown denoiser {self.denoiser!r}")


def ring_bits_bound(d_max: int, max_int_bits: int) -> int:
    """Worst-case total bits of a grid member: num and den each fit in
    bits(d_max) + integer-part bits (+1 sign/carry headroom)."""
    return 2 * (bit_width(d_max) + max_int_bits + 1)


def the_ring(h: RationalTensor, cfg: RingConfig) -> tuple[RationalTensor, dict]:
    """Project every entry onto the bounded-denominator grid.

    Entries pass through the configured denoiser, then the smallest-
    denominator approximation within eps (falling back to the nearest
    grid point when the tolerance is unreachable), then simplification.
    Idempotent with the identity denoiser.  Returns the projected tensor
    and a small stats dict (tolerance misses, max integer-part bits).
    """
    misses = 0
    max_int_bits = 0
    out = []
    for q in h.data:
        if cfg.denoiser == "round-through-float":
            q = from_float(to_float(q))
        res = rational_approx_detail(q, cfg.eps, cfg.d_max)
        v = simplify(res.value)
        if res.tolerance_miss:
            misses += 1
        int_bits = bit_width(abs(v.num) // v.den)
        if int_bits > max_int_bits:
            max_int_bits = int_bits
        out.append(v)
    stats = {"tolerance_misses": misses, "max_int_bits": max_int_bits}
    return RationalTensor(h.rows, h.cols, out), stats


def rational_attention(
    q: RationalTensor, k: RationalTensor, v: RationalTensor, cfg: TranscendConfig
) -> RationalTensor:
    """Single-head exact attention with power-of-two logit scaling.

    Scores are q·k^T scaled by 2**-shift (shift approximates sqrt(d)),
    rows pass through the rational softmax, and the weights are applied
    to v.  Every attention row sums to exactly one.
    """
    scores = rational_matmul(q, k.transpose())
    scores = scale_by_pow2(scores, attention_shift(q.cols))
    rows = []
    for i in range(scores.rows):
        rows.append(rat_softmax(list(scores.row(i)), cfg.taylor_order))
    weights = RationalTensor.from_rows(rows)
    return rational_matmul(weights, v)


def rational_ffn(
    h: RationalTensor, w1: RationalTensor, w2: RationalTensor
) -> RationalTensor:
    """relu(h @ w1) @ w2, all exact."""
    hidden = rational_matmul(h, w1).map_entries(rat_relu)
    return rational_matmul(hidden, w2)


@dataclass(frozen=True)
class InferenceConfig:
    """Shape, depth, and numeric policy of the recurrent loop."""

    depth: int = 300
    d_model: int = 32
    d_ff: int = 64
    n_heads: int = 1
    seq_len: int = 1
    vocab: int = 16
    scale_bits: int = 16
    seed: int = 42
    ring_enabled: bool = True
    taylor: TranscendConfig = field(default_factory=lambda: TranscendConfig(taylor_order=4))
    ring: RingConfig = field(default_factory=RingConfig)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if min(self.d_model, self.d_ff, self.seq_len, self.vocab) < 1:
            raise ValueError("model dimensions must be >= 1")
        if self.n_heads != 1:
            raise ValueError("only single-head attention is supported")

    def with_ring(self, enabled: bool) -> "InferenceConfig":
        return replace(self, ring_enabled=enabled)


class ModelWeights(NamedTuple):
    embed: RationalTensor  # vocab x d_model
    pos: RationalTensor  # seq_len x d_model
    w1: RationalTensor  # d_model x d_ff
    w2: RationalTensor  # d_ff x d_model
    w_out: RationalTensor  # d_model x vocab


def _lifted_uniform_matrix(
    rng: random.Random, rows: int, cols: int, bound: float, scale: int
) -> RationalTensor:
    # BF16-rounded draws lifted onto the 2**-scale_bits grid; lifting may
    # round once more (tiny magnitudes), which is fine: the lifted value
    # *is* the weight.
    data = []
    for _ in range(rows * cols):
        v = round_to(rng.uniform(-bound, bound), BF16)
        data.append(to_rational(v, scale))
    return RationalTensor(rows, cols, data)


def init_weights(cfg: InferenceConfig) -> ModelWeights:
    """Seeded dyadic weights on the 2**-scale_bits grid."""
    rng = random.Random(cfg.seed)
    scale = 1 << cfg.scale_bits
    bound = 1.0 / math.sqrt(cfg.d_model)
    return ModelWeights(
        embed=_lifted_uniform_matrix(rng, cfg.vocab, cfg.d_model, bound, scale),
        pos=_lifted_uniform_matrix(rng, cfg.seq_len, cfg.d_model, bound, scale),
        w1=_lifted_uniform_matrix(rng, cfg.d_model, cfg.d_ff, bound, scale),
        w2=_lifted_uniform_matrix(rng, cfg.d_ff, cfg.d_model, bound, scale),
        w_out=_lifted_uniform_matrix(rng, cfg.d_model, cfg.vocab, bound, scale),
    )


def save_weights(f, weights: ModelWeights) -> None:
    """Write a weight snapshot: per tensor a name line, a shape header,
    and one decimal `row col num den` line per entry."""
    from .tensor import write_tensor

    for name, tensor in zip(ModelWeights._fields, weights):
        f.write(f"tensor {name}\n")
        write_tensor(f, tensor)


def load_weights(f) -> ModelWeights:
    from .tensor import read_tensor

    tensors = {}
    for _ in ModelWeights._fields:
        header = f.readline().split()
        if len(header) != 2 or header[0] != "tensor":
            raise ValueError("missing tensor name line in weight snapshot")
        tensors[header[1]] = read_tensor(f)
    return ModelWeights(**tensors)


class InferenceResult(NamedTuple):
    logits: list[float]
    trace: list[BitReport]
    ring_stats: dict


def run_inference(
    tokens: Sequence[int], cfg: InferenceConfig, weights: ModelWeights
) -> InferenceResult:
    """End-to-end recurrent inference.

    Stage 1 lifts the embedded input onto the rational grid; stage 2
    iterates attention, feed-forward, and the lossless residual in exact
    arithmetic; stage 3 projects through the grid every `ring.interval`
    steps (when enabled); stage 4 collapses to floats, normalizes, and
    produces the output distribution for the last position.

    Fully deterministic: identical inputs give bit-identical traces.
    """
    if len(tokens) != cfg.seq_len:
        raise ValueError("token count must equal the configured sequence length")
    if any(t < 0 or t >= cfg.vocab for t in tokens):
        raise ValueError("token id out of range")
    expected = {
        "embed": (cfg.vocab, cfg.d_model),
        "pos": (cfg.seq_len, cfg.d_model),
        "w1": (cfg.d_model, cfg.d_ff),
        "w2": (cfg.d_ff, cfg.d_model),
        "w_out": (cfg.d_model, cfg.vocab),
    }
    for name, tensor in zip(ModelWeights._fields, weights):
        if (tensor.rows, tensor.cols) != expected[name]:
            raise ValueError(
                f"weight {name} has shape {(tensor.rows, tensor.cols)}, "
                f"expected {expected[name]}"
            )
    rows = []
    for pos, tok in enumerate(tokens):
        rows.append(
            [
                weights.embed.at(tok, j) + weights.pos.at(pos, j)
                for j in range(cfg.d_model)
            ]
        )
    h = RationalTensor.from_rows(rows)
    trace = [h.max_bit_report()]
    ring_stats = {"applications": 0, "tolerance_misses": 0, "max_int_bits": 0}
    for t in range(1, cfg.depth + 1):
        attn = rational_attention(h, h, h, cfg.taylor)
        mlp = rational_ffn(attn, weights.w1, weights.w2)
        h_temp = tensor_add(mlp, h)  # lossless residual: exact addition
        if cfg.ring_enabled and t % cfg.ring.interval == 0:
            h, stats = the_ring(h_temp, cfg.ring)
            # put the re-grounded entries back over one shared codebook
            # denominator; without it the next accumulation multiplies
            # the projected entries' unrelated denominators together
            h = expand_to_common_den(h, cfg.ring.d_max << 8)
            ring_stats["applications"] += 1
            ring_stats["tolerance_misses"] += stats["tolerance_misses"]
            ring_stats["max_int_bits"] = max(
                ring_stats["max_int_bits"], stats["max_int_bits"]
            )
        else:
            h = h_temp
        trace.append(h.max_bit_report())
    final = h.to_float_rows()
    normed = [_float_layernorm(row) for row in final]
    w_out = weights.w_out.to_float_rows()
    last = normed[-1]
    logits = [
        sum(last[i] * w_out[i][j] for i in range(cfg.d_model))
        for j in range(cfg.vocab)
    ]
    return InferenceResult(_float_softmax(logits), trace, ring_stats)


def _float_layernorm(row: list[float]) -> list[float]:
    n = len(row)
    mean = sum(row) / n
    var = sum((x - mean) ** 2 for x in row) / n
    inv = 1.0 / math.sqrt(var + 1e-30)
    return [(x - mean) * inv for x in row]


def _float_softmax(logits: list[float]) -> list[float]:
    m = max(logits)
    exps = [math.exp(x - m) for x in logits]
    s = sum(exps)
    return [e / s for e in exps]


@dataclass(frozen=True)
class LossConfig:
    """Weights of the two stop-gradient halves of the alignment loss."""

    beta: Rational = field(default_factory=lambda: Rational(1, 4))
    gamma: Rational = field(default_factory=lambda: Rational(1))

    def __post_init__(self):
        if self.beta.num < 0 or self.gamma.num < 0:
            raise ValueError("loss weights must be >= 0")


class RingLossResult(NamedTuple):
    loss: float
    grad_z_e: list[float]
    grad_z_q: list[float]


def ring_loss(
    z_e: Sequence[float], z_q: Sequence[Rational], cfg: LossConfig
) -> RingLossResult:
    """Alignment loss between a float embedding and its grid projection.

    Both halves share the squared-distance value; stop-gradient semantics
    split the derivative: only the gamma term reaches z_e (2*gamma*(z_e -
    z_q)) while the beta term's derivative targets z_q (2*beta*(z_q -
    z_e)), reported separately.
    """
    if len(z_e) != len(z_q):
        raise ValueError("length mismatch between embedding and projection")
    beta = to_float(cfg.beta)
    gamma = to_float(cfg.gamma)
    qf = [to_float(q) for q in z_q]
    diffs = [e - c for e, c in zip(z_e, qf)]
    sq = sum(d * d for d in diffs)
    loss = beta * sq + gamma * sq
    grad_e = [2.0 * gamma * d for d in diffs]
    grad_q = [2.0 * beta * -d for d in diffs]
    return RingLossResult(loss, grad_e, grad_q)


class SteResult(NamedTuple):
    z_q: list[Rational]
    backward_is_identity: bool  # the projection's Jacobian is defined as I


def ste_project(z_e: Sequence[float], cfg: RingConfig) -> SteResult:
    """Straight-through grid projection of a float vector.

    Forward: entrywise smallest-denominator approximation of the lifted
    values.  Backward contract: downstream gradients pass through
    unchanged by definition.
    """
    out = []
    for v in z_e:
        lifted = to_rational(v, 1 << 53)
        out.append(rational_approx_detail(lifted, cfg.eps, cfg.d_max).value)
    return SteResult(out, True)
