"""Exact rational inference substrate.

Fractions of arbitrary-precision integers with lazy reduction are the
computational medium; periodic grid re-grounding bounds their bit-width;
Mersenne-residue checking turns silent corruption into detected faults;
and a cycle-level cost model plus a benchmark CLI reproduce the failure
modes of reduced-precision floating point on chaotic and deep-recurrence
workloads.
"""

from .core import (
    ApproxResult,
    BitReport,
    Rational,
    bit_report,
    bit_width,
    from_float,
    parse_rational,
    rat_add,
    rat_div,
    rat_mul,
    rat_sub,
    rational_approx,
    rational_approx_detail,
    simplify,
    stein_gcd,
    sum_exact,
    to_float,
    to_rational,
    to_rational_with_loss,
)
from .floatemu import BF16, EXACT, FP32, FP64, PrecisionRegime, emulated_op, reduce_ordered, round_to
from .integrity import M1, M2, FaultReport, ResiduePair, dmr_check, inject_fault, mersenne_mod, residues
from .net import (
    InferenceConfig,
    LossConfig,
    ModelWeights,
    RingConfig,
    init_weights,
    load_weights,
    rational_attention,
    rational_ffn,
    ring_loss,
    run_inference,
    save_weights,
    ste_project,
    the_ring,
)
from .tensor import RationalTensor, rational_matmul, read_tensor, write_tensor
from .transcend import (
    SeriesUnderflowError,
    TranscendConfig,
    rat_exp,
    rat_inv_sqrt,
    rat_layernorm,
    rat_relu,
    rat_softmax,
)
from .eiu import EiuConfig, PipelineStats, simulate_pipeline, steps_until_reduction

__version__ = "0.1.0"
