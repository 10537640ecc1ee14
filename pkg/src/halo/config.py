"""Flat key=value run configuration.

One namespace of dotted keys; precedence is defaults, then the config
file, then command-line overrides, left to right.  Unknown keys are
errors (no silent typo absorption), and every resolved value can be
written back out as a file that reproduces the run.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, NamedTuple

from .core import format_rational, parse_rational


class ConfigError(Exception):
    pass


def _parse_int(s: str) -> int:
    return int(s, 0)


def _parse_float(s: str) -> float:
    return float(s)


def _parse_ints(s: str) -> tuple[int, ...]:
    return tuple(int(p.strip(), 0) for p in s.split(",") if p.strip())


def _parse_strs(s: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in s.split(",") if p.strip())


def _fmt_plain(v) -> str:
    return str(v)


def _fmt_float(v: float) -> str:
    return repr(v)


def _fmt_seq(v) -> str:
    return ",".join(str(x) for x in v)


class _Key(NamedTuple):
    default: object
    parse: Callable[[str], object]
    fmt: Callable[[object], str]


def _int_key(default: int) -> _Key:
    return _Key(default, _parse_int, _fmt_plain)


def _rational_key(default: str) -> _Key:
    return _Key(parse_rational(default), parse_rational, format_rational)


KEYS: dict[str, _Key] = {
    "seed": _int_key(42),
    "regimes": _Key(("bf16", "fp32", "exact"), _parse_strs, _fmt_seq),
    "logistic.steps": _int_key(2000),
    "logistic.r": _rational_key("4"),
    "logistic.x0": _rational_key("1/5"),
    "logistic.survival-threshold": _rational_key("1/100"),
    "logistic.ring-k": _int_key(10),
    "logistic.ring-dmax": _int_key(1 << 31),
    "logistic.ring-eps": _rational_key("1e-16"),
    "drift.dim": _int_key(64),
    "drift.steps": _int_key(500),
    "drift.scale-bits": _int_key(16),
    "drift.sigma-target": _Key(1.0085, _parse_float, _fmt_float),
    "gradient.depth": _int_key(120),
    "needle.dim": _int_key(16),
    "needle.lengths": _Key((128, 512, 1024, 2048, 4096), _parse_ints, _fmt_seq),
    "needle.ring-k": _int_key(100),
    "needle.ring-dmax": _int_key(1 << 16),
    "needle.ring-eps": _rational_key("1e-16"),
    "needle.lift-bits": _int_key(8),
    "scale.widths": _Key((1024, 4096, 24576), _parse_ints, _fmt_seq),
    "scale.trials": _int_key(100),
    "ring.k": _int_key(50),
    "ring.dmax": _int_key(1 << 16),
    "ring.eps": _rational_key("1e-16"),
    "taylor.n": _int_key(4),
    "nr.tolerance": _rational_key("1e-30"),
    "nr.max-iters": _int_key(64),
    "infer.steps": _int_key(300),
    "infer.d-model": _int_key(32),
    "infer.d-ff": _int_key(64),
    "infer.vocab": _int_key(16),
    "infer.scale-bits": _int_key(16),
    "assoc.n": _int_key(16),
    "assoc.trials": _int_key(25),
    "dmr.bursts": _int_key(100_000),
    "dmr.window": _int_key(64),
    "dmr.min-flips": _int_key(2),
    "dmr.max-flips": _int_key(8),
    "dmr.operand-bits": _int_key(256),
    "pipeline.dim": _int_key(64),
    "pipeline.steps": _int_key(200),
    "pipeline.budget-bits": _int_key(1024),
    "pipeline.gcd-rate": _int_key(64),
    "pipeline.matmul-cycles": _int_key(16),
    "pipeline.queue-depth": _int_key(4),
    "pipeline.weight-scale-bits": _int_key(11),
    "pipeline.trigger-num": _int_key(3),
    "pipeline.trigger-den": _int_key(4),
}


def parse_config_file(path: str | Path) -> list[tuple[int, str, str]]:
    """Read `key = value` lines; '#' starts a comment; blank lines skip."""
    pairs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs.append((lineno, key, value))
    return pairs


def resolve_config(
    file_pairs: list[tuple[int, str, str]] | None = None,
    overrides: list[tuple[str, str]] | None = None,
) -> dict[str, object]:
    """defaults <- file <- overrides, with unknown keys rejected."""
    resolved = {k: spec.default for k, spec in KEYS.items()}
    for lineno, key, value in file_pairs or []:
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            resolved[key] = KEYS[key].parse(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    for key, value in overrides or []:
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            resolved[key] = KEYS[key].parse(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return resolved


def format_config(resolved: dict[str, object]) -> str:
    lines = [f"{key} = {KEYS[key].fmt(resolved[key])}" for key in sorted(KEYS)]
    return "\n".join(lines) + "\n"


def write_meta(path: Path, resolved: dict[str, object], extras: dict[str, str]) -> None:
    """Config echo that round-trips as a config file; extras ride along
    as comments."""
    body = format_config(resolved)
    comment_lines = [f"# {k} = {v}" for k, v in sorted(extras.items())]
    text = body + ("\n".join(comment_lines) + "\n" if comment_lines else "")
    path.write_text(text)
