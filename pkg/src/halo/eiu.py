"""Deterministic cost model of the exact-inference pipeline.

Replays a bit-width trajectory against a register budget: values grow
while matmul steps advance, a background reducer drains queued
simplification jobs at a fixed bit rate, and the model charges a stall
only when a value would overflow its register before its pending
reduction lands.  Model time is cycle bookkeeping, not wall clock; one
matmul step costs the same regardless of operand width, which isolates
the overlap structure being studied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .core import BitReport


@dataclass(frozen=True)
class EiuConfig:
    register_bits: int = 1024
    gcd_bits_per_cycle: int = 64  # 0 models a disabled reduction engine
    matmul_cycles_per_step: int = 16
    queue_depth: int = 4
    trigger_num: int = 3  # reduction triggers at 3/4 of the budget
    trigger_den: int = 4

    def __post_init__(self):
        if self.register_bits < 64:
            raise ValueError("register budget must be >= 64 bits")
        if self.gcd_bits_per_cycle < 0:
            raise ValueError("reduction rate must be >= 0")
        if self.matmul_cycles_per_step < 1 or self.queue_depth < 1:
            raise ValueError("cycle cost and queue depth must be >= 1")
        if not (0 < self.trigger_num <= self.trigger_den):
            raise ValueError("trigger fraction must be in (0, 1]")

    @property
    def threshold_bits(self) -> int:
        return self.register_bits * self.trigger_num // self.trigger_den


class PipelineStats(NamedTuple):
    steps_executed: int
    reductions_triggered: int
    stall_cycles: int
    saturation_events: int
    peak_bits: int


class PipelineStep(NamedTuple):
    step: int
    live_bits: int
    pending_jobs: int
    stalled: int
    reduced_this_step: int


def _bits_of(entry) -> int:
    if isinstance(entry, BitReport):
        return entry.total_bits
    return int(entry)


def simulate_pipeline(
    trace: Sequence, cfg: EiuConfig
) -> tuple[PipelineStats, list[PipelineStep]]:
    """Replay a bit-width trajectory through the register/reducer model.

    One outstanding reduction job per live value: the job snapshots the
    value's current bits (a shift/subtract reducer's cost is linear in
    operand bits) and, once drained, restores the register to the
    stream's baseline width plus any growth that arrived meanwhile.
    Queue overflow and overflow-before-reduction turn into stalls; a hard
    overflow with no possible rescue is a saturation event, never data
    loss.
    """
    if not trace:
        raise ValueError("empty trace")
    bits = [_bits_of(e) for e in trace]
    baseline = bits[0]
    live = baseline
    # FIFO of [remaining_drain_bits, reclaimable_excess]; `promised` is
    # the total excess already covered by queued jobs
    pending: list[list[int]] = []
    promised = 0
    reductions = 0
    stall_cycles = 0
    saturation = 0
    peak = live
    stalled = 0
    reduced = 0
    rate = cfg.gcd_bits_per_cycle

    def complete_front() -> None:
        nonlocal live, promised, reduced
        excess = pending.pop(0)[1]
        live -= excess
        promised -= excess
        reduced = 1

    rows = [PipelineStep(0, live, 0, 0, 0)]
    for step in range(1, len(bits)):
        delta = bits[step] - bits[step - 1]
        stalled = 0
        reduced = 0
        # the reducer drains concurrently with this step's matmul cycles
        budget = rate * cfg.matmul_cycles_per_step
        while pending and budget > 0:
            take = min(budget, pending[0][0])
            pending[0][0] -= take
            budget -= take
            if pending[0][0] == 0:
                complete_front()
        live += delta
        # overflow threat: wait for pending reductions before growing past
        # the register; only a rescue-less overflow is a saturation event
        while live > cfg.register_bits and pending and rate > 0:
            stall_cycles += -(-pending[0][0] // rate)
            stalled = 1
            complete_front()
        if live > cfg.register_bits:
            saturation += 1
        if rate > 0 and live >= cfg.threshold_bits:
            if len(pending) >= cfg.queue_depth:
                # queue overflow: stall until the front job lands
                stall_cycles += -(-pending[0][0] // rate)
                stalled = 1
                complete_front()
            excess = (live - baseline) - promised
            if excess > 0:
                pending.append([live, excess])
                promised += excess
                reductions += 1
        if live > peak:
            peak = live
        rows.append(PipelineStep(step, live, len(pending), stalled, reduced))
    stats = PipelineStats(
        steps_executed=len(bits) - 1,
        reductions_triggered=reductions,
        stall_cycles=stall_cycles,
        saturation_events=saturation,
        peak_bits=peak,
    )
    return stats, rows


def steps_until_reduction(per_step_growth_bits: int, start_bits: int, cfg: EiuConfig) -> int:
    """Closed-form count of full steps below the reduction trigger.

    With bits(t) = start + alpha * t, the first step at or above the
    threshold is ceil((threshold - start) / alpha); the count of steps
    strictly below it is that minus one.
    """
    if per_step_growth_bits <= 0:
        raise ValueError("growth rate must be positive")
    threshold = cfg.threshold_bits
    if start_bits >= threshold:
        return 0
    return (threshold - start_bits - 1) // per_step_growth_bits
