"""Pipeline cost model: closed form vs simulation, determinism,
monotonicity in the reducer rate, and saturation semantics."""

import random

import pytest

from halo.core import BitReport
from halo.eiu import EiuConfig, PipelineStats, simulate_pipeline, steps_until_reduction


def linear_trace(b0: int, alpha: int, steps: int) -> list[int]:
    return [b0 + alpha * t for t in range(steps + 1)]


def test_config_validation():
    with pytest.raises(ValueError):
        EiuConfig(register_bits=32)
    with pytest.raises(ValueError):
        EiuConfig(gcd_bits_per_cycle=-1)
    with pytest.raises(ValueError):
        EiuConfig(queue_depth=0)
    with pytest.raises(ValueError):
        EiuConfig(trigger_num=5, trigger_den=4)


def test_threshold_arithmetic():
    assert EiuConfig(register_bits=1024).threshold_bits == 768


def test_closed_form_known_case():
    # arithmetic oracle: floor((768 - 32) / 22) = 33
    assert (768 - 32) // 22 == 33
    cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=64)
    assert steps_until_reduction(22, 32, cfg) == 33


def test_closed_form_boundary():
    cfg = EiuConfig(register_bits=1024)
    assert steps_until_reduction(1, 768, cfg) == 0
    assert steps_until_reduction(1, 9999, cfg) == 0


def test_closed_form_matches_simulation():
    rng = random.Random(50)
    for _ in range(100):
        alpha = rng.randint(1, 99)
        b0 = rng.randint(1, 700)
        cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=64)
        want = steps_until_reduction(alpha, b0, cfg)
        _, rows = simulate_pipeline(linear_trace(b0, alpha, 200), cfg)
        first = next(
            (r.step for r in rows if r.pending_jobs > 0 or r.reduced_this_step), None
        )
        if first is None:
            assert b0 + alpha * 200 < cfg.threshold_bits
        else:
            assert first - 1 == want, (alpha, b0)


def test_flat_trace_triggers_nothing():
    cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=64)
    stats, rows = simulate_pipeline([100] * 50, cfg)
    assert stats == PipelineStats(49, 0, 0, 0, 100)
    assert all(r.pending_jobs == 0 and not r.stalled for r in rows)


def test_disabled_engine_saturates_on_growth():
    cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=0)
    stats, _ = simulate_pipeline(linear_trace(64, 40, 60), cfg)
    assert stats.saturation_events >= 1
    assert stats.reductions_triggered == 0
    assert stats.peak_bits >= cfg.register_bits


def test_saturation_implies_peak_over_budget():
    rng = random.Random(51)
    for _ in range(50):
        trace = [64]
        for _ in range(80):
            trace.append(max(16, trace[-1] + rng.randint(-20, 60)))
        for rate in (0, 1, 8, 64):
            cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=rate)
            stats, _ = simulate_pipeline(trace, cfg)
            if stats.saturation_events:
                assert stats.peak_bits >= cfg.register_bits


def test_deterministic_replay():
    rng = random.Random(52)
    trace = [64]
    for _ in range(200):
        trace.append(max(16, trace[-1] + rng.randint(-10, 50)))
    cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=8, matmul_cycles_per_step=4)
    a = simulate_pipeline(trace, cfg)
    b = simulate_pipeline(trace, cfg)
    assert a == b


def test_rate_monotonicity_over_positive_rates():
    rng = random.Random(53)
    for _ in range(30):
        trace = [64]
        for _ in range(150):
            trace.append(max(16, trace[-1] + rng.randint(0, 45)))
        prev_stalls = None
        prev_sats = None
        for rate in (1, 2, 4, 8, 16, 32, 64, 128):
            cfg = EiuConfig(register_bits=1024, gcd_bits_per_cycle=rate)
            stats, _ = simulate_pipeline(trace, cfg)
            if prev_stalls is not None:
                assert stats.stall_cycles <= prev_stalls
                assert stats.saturation_events <= prev_sats
            prev_stalls = stats.stall_cycles
            prev_sats = stats.saturation_events


def test_accepts_bit_reports():
    trace = [BitReport(10, 6, 16), BitReport(20, 6, 26), BitReport(30, 6, 36)]
    stats, _ = simulate_pipeline(trace, EiuConfig())
    assert stats.steps_executed == 2
    assert stats.peak_bits == 36


def test_empty_trace_rejected():
    with pytest.raises(ValueError):
        simulate_pipeline([], EiuConfig())


def test_queue_pressure_converts_to_stall_not_loss():
    # steep growth with a slow engine: the queue caps and the model
    # charges stalls; live bits stay within the register plus one step
    cfg = EiuConfig(
        register_bits=1024,
        gcd_bits_per_cycle=1,
        matmul_cycles_per_step=1,
        queue_depth=2,
    )
    stats, rows = simulate_pipeline(linear_trace(600, 90, 40), cfg)
    assert stats.stall_cycles > 0
    assert all(r.pending_jobs <= cfg.queue_depth for r in rows)
