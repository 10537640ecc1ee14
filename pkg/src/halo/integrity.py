"""Dual-modular integrity checking over two coprime Mersenne moduli.

Integer operations are verified by recomputing them in the residue
fields modulo 2**31 - 1 and 2**17 - 1.  Reduction needs no division:
k-bit chunks fold together with end-around carries.  A mismatch in
either field turns a silent corruption into a detected fault; the only
undetectable nonzero errors are multiples of the moduli's product.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from . import core

M1_BITS = 31
M2_BITS = 17
M1 = (1 << M1_BITS) - 1
M2 = (1 << M2_BITS) - 1


class ResiduePair(NamedTuple):
    """A value's residues modulo M1 and M2."""

    r1: int
    r2: int


class FaultReport(NamedTuple):
    detected: bool
    failing_modulus: tuple[int, ...]  # subset of (M1, M2)
    injected_error_magnitude: int  # 0 when unknown to the checker


def mersenne_mod(x: int, k: int) -> int:
    """x mod (2**k - 1) by folding k-bit chunks with end-around carry."""
    if x < 0:
        raise ValueError("mersenne_mod requires x >= 0")
    if k not in (M1_BITS, M2_BITS):
        raise ValueError("supported moduli are 2**31-1 and 2**17-1")
    m = (1 << k) - 1
    while x > m:
        x = (x & m) + (x >> k)
    return 0 if x == m else x


def residues(n: int) -> ResiduePair:
    """Canonical non-negative residues; negatives map via complement."""
    a = abs(n)
    r1 = mersenne_mod(a, M1_BITS)
    r2 = mersenne_mod(a, M2_BITS)
    if n < 0:
        r1 = (M1 - r1) % M1
        r2 = (M2 - r2) % M2
    return ResiduePair(r1, r2)


def dmr_check(a: int, b: int, c: int, kind: str) -> FaultReport:
    """Verify c == a op b by two simultaneous congruence checks."""
    if kind not in ("add", "mul"):
        raise ValueError(f"unknown op kind {kind!r}")
    ra, rb, rc = residues(a), residues(b), residues(c)
    if kind == "add":
        e1 = mersenne_mod(ra.r1 + rb.r1, M1_BITS)
        e2 = mersenne_mod(ra.r2 + rb.r2, M2_BITS)
    else:
        e1 = mersenne_mod(ra.r1 * rb.r1, M1_BITS)
        e2 = mersenne_mod(ra.r2 * rb.r2, M2_BITS)
    failing = []
    if e1 != rc.r1:
        failing.append(M1)
    if e2 != rc.r2:
        failing.append(M2)
    return FaultReport(bool(failing), tuple(failing), 0)


def inject_fault(c: int, bit_positions: Iterable[int]) -> int:
    """Toggle the given bit positions of c (flips may extend the value)."""
    if c < 0:
        raise ValueError("fault injection operates on non-negative values")
    mask = 0
    for p in bit_positions:
        if p < 0:
            raise ValueError("bit positions must be >= 0")
        mask |= 1 << p
    return c ^ mask


@dataclass
class ShadowCounters:
    """Pass/fail tallies from the shadow verification hook.

    Counters are kept per thread and merged on read, so concurrent
    verified computation needs no locking.
    """

    _local: threading.local = field(default_factory=threading.local, repr=False)
    _all: list = field(default_factory=list, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _cell(self):
        cell = getattr(self._local, "cell", None)
        if cell is None:
            cell = {"checked": 0, "failed": 0}
            self._local.cell = cell
            with self._lock:
                self._all.append(cell)
        return cell

    def record(self, ok: bool) -> None:
        cell = self._cell()
        cell["checked"] += 1
        if not ok:
            cell["failed"] += 1

    @property
    def checked(self) -> int:
        with self._lock:
            return sum(c["checked"] for c in self._all)

    @property
    def failed(self) -> int:
        with self._lock:
            return sum(c["failed"] for c in self._all)


class shadow_verification:
    """Context manager installing residue checks on the rational core's
    integer multiplies.  Latency masking is a cost-model concern; this
    hook reproduces only the coverage arithmetic.

    Usage::

        with shadow_verification() as counters:
            ...exact arithmetic...
        assert counters.failed == 0
    """

    def __init__(self):
        self.counters = ShadowCounters()

    def __enter__(self) -> ShadowCounters:
        def hook(kind: str, x: int, y: int, result: int) -> None:
            self.counters.record(not dmr_check(x, y, result, kind).detected)

        core.set_arith_hook(hook)
        return self.counters

    def __exit__(self, *exc) -> None:
        core.set_arith_hook(None)
