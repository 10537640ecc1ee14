"""Experiment harness at reduced scale: record shapes, exact-regime
zeroing, determinism of emitted rows, and per-experiment sanity."""

import random
from fractions import Fraction

import pytest

from halo import bench
from halo.core import Rational, parse_rational

ALL_REGIMES = ("bf16", "fp32", "exact")


def small_logistic(steps=80, regimes=ALL_REGIMES):
    return bench.LogisticParams(
        r=parse_rational("4"),
        x0=parse_rational("1/5"),
        steps=steps,
        survival_threshold=parse_rational("1/100"),
        ring_interval=10,
        ring_d_max=1 << 31,
        ring_eps=parse_rational("1e-16"),
        regimes=regimes,
        seed=42,
    )


def test_logistic_exact_path_prefix():
    xs = bench._logistic_exact_path(small_logistic(steps=2))
    assert (xs[1].num, xs[1].den) == (16, 25)
    assert (xs[2].num, xs[2].den) == (576, 625)


def test_logistic_exact_errors_are_zero():
    out = bench.run_logistic(small_logistic())
    exact_rows = [r for r in out.rows if r[1] == "EXACT"]
    assert exact_rows and all(r[3] == "0" for r in exact_rows)
    assert all(int(r[4]) > 0 for r in exact_rows)  # bits recorded


def test_logistic_survival_ordering():
    out = bench.run_logistic(small_logistic())
    bf = int(out.meta["survival_step.bf16"])
    fp = int(out.meta["survival_step.fp32"])
    assert bf < fp


def test_logistic_row_order_regime_major():
    out = bench.run_logistic(small_logistic(steps=5))
    regimes = [r[1] for r in out.rows]
    assert regimes == ["BF16"] * 6 + ["FP32"] * 6 + ["EXACT"] * 6


def test_regime_filter_and_unknown():
    out = bench.run_logistic(small_logistic(steps=5, regimes=("exact",)))
    assert {r[1] for r in out.rows} == {"EXACT"}
    with pytest.raises(ValueError):
        bench.run_logistic(small_logistic(regimes=("fp8",)))


def test_experiment_preconditions():
    with pytest.raises(ValueError):
        bench.run_logistic(small_logistic()._replace(x0=parse_rational("2")))
    with pytest.raises(ValueError):
        bench.run_drift(bench.DriftParams(1, 5, 16, 1.0085, ALL_REGIMES, 42))
    with pytest.raises(ValueError):
        bench.run_scale(bench.ScaleParams((1,), 5, ALL_REGIMES, 42))
    with pytest.raises(ValueError):
        bench.run_ring_cost(
            bench.RingCostParams(3, 8, 8, 16, 8, 3, 1 << 16, parse_rational("1e-16"), 16, 42)
        )
    with pytest.raises(ValueError):
        bench.run_associativity(bench.AssociativityParams(2, 3, ALL_REGIMES, 42))


def test_needle_length_zero_has_zero_error():
    p = bench.NeedleParams(
        9, (0, 12), 6, 1 << 16, parse_rational("1e-16"), 8, ALL_REGIMES, 42
    )
    out = bench.run_needle(p)
    at_zero = {r[1]: r[3] for r in out.rows if r[2] == "0"}
    assert at_zero == {"BF16": "0", "FP32": "0", "EXACT": "0"}


def test_drift_small_scale():
    p = bench.DriftParams(8, 40, 16, 1.0085, ALL_REGIMES, 42)
    out = bench.run_drift(p)
    assert out.meta["first_exceeds_1e-4.exact"] == "none"
    exact_bits = [int(r[4]) for r in out.rows if r[1] == "EXACT"]
    assert exact_bits == sorted(exact_bits)  # lazy growth is monotone
    bf = [float(r[3]) for r in out.rows if r[1] == "BF16"]
    assert bf[0] == 0.0  # shared start
    assert max(bf) > 0


def test_drift_matrix_band():
    w = bench.drift_matrix(8, 16, 1.0085, 7)
    floats = [[float(Fraction(w.at(i, j).num, w.at(i, j).den)) for j in range(8)] for i in range(8)]
    sigma = bench._estimate_sigma_max(floats)
    assert 0.99 <= sigma <= 1.01


def test_gradient_small_scale():
    p = bench.GradientParams(
        30, parse_rational("4"), parse_rational("1/5"), 10, 1 << 31,
        parse_rational("1e-16"), ALL_REGIMES, 42,
    )
    out = bench.run_gradient(p)
    exact = [r for r in out.rows if r[1] == "EXACT"]
    assert all(r[3] == "0" for r in exact)
    depth1 = [float(r[3]) for r in out.rows if r[2] == "1" and r[1] != "EXACT"]
    assert all(d < 0.01 for d in depth1)  # single factor: regime precision


def test_needle_small_scale():
    p = bench.NeedleParams(
        9, (12, 24), 6, 1 << 16, parse_rational("1e-16"), 8, ALL_REGIMES, 42
    )
    out = bench.run_needle(p)
    assert out.meta["ring_tolerance_misses"] == "0"
    exact = {r[2]: r[3] for r in out.rows if r[1] == "EXACT"}
    assert exact == {"12": "0", "24": "0"}


def test_scale_small_scale():
    p = bench.ScaleParams((64, 256), 5, ALL_REGIMES, 42)
    out = bench.run_scale(p)
    exact = [r for r in out.rows if r[1] == "EXACT"]
    assert all(r[3] == "0" for r in exact)
    bf = {int(r[2]): float(r[3]) for r in out.rows if r[1] == "BF16"}
    assert bf[256] > bf[64] > 0


def test_ring_cost_small_scale():
    p = bench.RingCostParams(
        40, 8, 8, 16, 8, 3, 1 << 16, parse_rational("1e-16"), 16, 42
    )
    out = bench.run_ring_cost(p)
    assert out.meta["bound_holds"] == "True"
    on = [int(r[4]) for r in out.rows if r[-1] == "on"]
    off = [int(r[4]) for r in out.rows if r[-1] == "off"]
    assert on[0] == off[0]  # shared start
    assert off[16] > on[16]


def test_associativity_small_scale():
    p = bench.AssociativityParams(8, 6, ALL_REGIMES, 42)
    out = bench.run_associativity(p)
    assert out.meta["distinct_results.exact"] == "1"
    assert int(out.meta["distinct_results.bf16"]) >= 1


def test_associativity_zero_trials():
    p = bench.AssociativityParams(8, 0, ALL_REGIMES, 42)
    out = bench.run_associativity(p)
    assert out.rows == []


def test_dmr_small_scale():
    p = bench.DmrParams(500, 64, 2, 8, 128, 42)
    out = bench.run_dmr(p)
    singles = [r for r in out.rows if r[1] == "single-mul"]
    assert len(singles) == 256 and all(r[5] == "1" for r in singles)
    assert out.meta["designed_collision_detected"] == "False"
    # any undetected burst must sit on the designed collision lattice
    for r in out.rows:
        if r[1].startswith("burst") and r[5] == "0":
            assert r[3] == "0" and r[4] == "0"


def test_pipeline_small_scale():
    p = bench.PipelineParams(16, 80, 1024, 64, 16, 4, 11, 42)
    out = bench.run_pipeline(p)
    assert int(out.meta["steps_before_first_trigger"]) > 0
    assert out.header == ["step", "live_bits", "pending_jobs", "stalled", "reduced_this_step"]


def test_experiments_emit_identical_rows_across_runs():
    for make, run in (
        (lambda: small_logistic(steps=40), bench.run_logistic),
        (lambda: bench.DriftParams(8, 20, 16, 1.0085, ALL_REGIMES, 42), bench.run_drift),
        (lambda: bench.ScaleParams((32, 64), 3, ALL_REGIMES, 42), bench.run_scale),
        (lambda: bench.AssociativityParams(8, 4, ALL_REGIMES, 42), bench.run_associativity),
    ):
        a = run(make())
        b = run(make())
        assert a.rows == b.rows and a.meta == b.meta


def test_float_formatting_is_17_significant_digits():
    assert bench.fmt_float(0.1) == "0.10000000000000001"
    assert bench.fmt_float(0.0) == "0"
    assert float(bench.fmt_float(1 / 3)) == 1 / 3


def test_every_error_is_finite_or_flagged():
    import math

    outputs = [
        bench.run_logistic(small_logistic(steps=30)),
        bench.run_drift(bench.DriftParams(8, 15, 16, 1.0085, ALL_REGIMES, 42)),
        bench.run_gradient(
            bench.GradientParams(
                140,  # deep enough for the bf16 product to overflow
                parse_rational("4"), parse_rational("1/5"), 10, 1 << 31,
                parse_rational("1e-16"), ALL_REGIMES, 42,
            )
        ),
    ]
    saw_flag = False
    for out in outputs:
        err_i = out.header.index("error")
        flag_i = out.header.index("flag")
        for row in out.rows:
            value = float(row[err_i])
            if math.isfinite(value):
                continue
            assert row[flag_i] in ("overflow", "nan"), row
            saw_flag = True
    assert saw_flag  # the deep gradient run exercises the overflow flag
