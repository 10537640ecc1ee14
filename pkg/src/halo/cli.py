"""Command-line front end: dispatch experiments, write CSVs and metadata.

Exit codes: 0 success, 1 experiment failure, 2 argument or config error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench
from .config import ConfigError, parse_config_file, resolve_config, write_meta

EXPERIMENTS = (
    "logistic",
    "drift",
    "gradient",
    "needle",
    "scale",
    "ringcost",
    "associativity",
    "dmr",
    "pipeline",
)

# which config key the generic --steps flag maps to, per command
STEPS_KEY = {
    "logistic": "logistic.steps",
    "drift": "drift.steps",
    "gradient": "gradient.depth",
    "ringcost": "infer.steps",
    "pipeline": "pipeline.steps",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halo",
        description=(
            "Exact-rational inference benchmarks: run precision-failure "
            "experiments against emulated BF16/FP32 baselines and write "
            "deterministic CSV records."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("all",):
        p = sub.add_parser(name, help=f"run the {name} experiment(s)")
        p.add_argument("--steps", type=int, default=None,
                       help="step count / depth for commands that iterate")
        p.add_argument("--seed", type=int, default=None, help="run seed (default 42)")
        p.add_argument("--out", default=None,
                       help="output directory (falls back to $HALO_OUT, then ./results)")
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--regimes", default=None,
                       help="comma list from bf16,fp32,exact")
        p.add_argument("--ring.k", dest="ring_k", type=int, default=None,
                       help="re-grounding interval for the inference ring")
        p.add_argument("--ring.dmax", dest="ring_dmax", type=int, default=None,
                       help="grid denominator bound for the inference ring")
        p.add_argument("--taylor.n", dest="taylor_n", type=int, default=None,
                       help="series order for rational exponentials")
        p.add_argument("--budget-bits", type=int, default=None,
                       help="register budget for the pipeline model")
        p.add_argument("--gcd-rate", type=int, default=None,
                       help="background reducer throughput, bits per cycle")
        p.add_argument("--set", dest="sets", action="append", default=[],
                       metavar="KEY=VALUE", help="override any config key")
    return parser


def _collect_overrides(args) -> list[tuple[str, str]]:
    overrides: list[tuple[str, str]] = []
    if args.seed is not None:
        overrides.append(("seed", str(args.seed)))
    if args.regimes is not None:
        overrides.append(("regimes", args.regimes))
    if args.ring_k is not None:
        overrides.append(("ring.k", str(args.ring_k)))
    if args.ring_dmax is not None:
        overrides.append(("ring.dmax", str(args.ring_dmax)))
    if args.taylor_n is not None:
        overrides.append(("taylor.n", str(args.taylor_n)))
    if args.budget_bits is not None:
        overrides.append(("pipeline.budget-bits", str(args.budget_bits)))
    if args.gcd_rate is not None:
        overrides.append(("pipeline.gcd-rate", str(args.gcd_rate)))
    if args.steps is not None:
        key = STEPS_KEY.get(args.command)
        if key is None:
            raise ConfigError(f"--steps is not meaningful for {args.command!r}")
        overrides.append((key, str(args.steps)))
    for item in args.sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides.append((key.strip(), value.strip()))
    return overrides


def _params(name: str, cfg: dict):
    if name == "logistic":
        return bench.LogisticParams(
            r=cfg["logistic.r"],
            x0=cfg["logistic.x0"],
            steps=cfg["logistic.steps"],
            survival_threshold=cfg["logistic.survival-threshold"],
            ring_interval=cfg["logistic.ring-k"],
            ring_d_max=cfg["logistic.ring-dmax"],
            ring_eps=cfg["logistic.ring-eps"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "drift":
        return bench.DriftParams(
            dim=cfg["drift.dim"],
            steps=cfg["drift.steps"],
            scale_bits=cfg["drift.scale-bits"],
            sigma_target=cfg["drift.sigma-target"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "gradient":
        return bench.GradientParams(
            depth=cfg["gradient.depth"],
            r=cfg["logistic.r"],
            x0=cfg["logistic.x0"],
            ring_interval=cfg["logistic.ring-k"],
            ring_d_max=cfg["logistic.ring-dmax"],
            ring_eps=cfg["logistic.ring-eps"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "needle":
        return bench.NeedleParams(
            dim=cfg["needle.dim"],
            lengths=cfg["needle.lengths"],
            ring_interval=cfg["needle.ring-k"],
            ring_d_max=cfg["needle.ring-dmax"],
            ring_eps=cfg["needle.ring-eps"],
            lift_bits=cfg["needle.lift-bits"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "scale":
        return bench.ScaleParams(
            widths=cfg["scale.widths"],
            trials=cfg["scale.trials"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "ringcost":
        return bench.RingCostParams(
            steps=cfg["infer.steps"],
            interval=cfg["ring.k"],
            d_model=cfg["infer.d-model"],
            d_ff=cfg["infer.d-ff"],
            vocab=cfg["infer.vocab"],
            taylor_order=cfg["taylor.n"],
            d_max=cfg["ring.dmax"],
            eps=cfg["ring.eps"],
            scale_bits=cfg["infer.scale-bits"],
            seed=cfg["seed"],
        )
    if name == "associativity":
        return bench.AssociativityParams(
            n=cfg["assoc.n"],
            trials=cfg["assoc.trials"],
            regimes=cfg["regimes"],
            seed=cfg["seed"],
        )
    if name == "dmr":
        return bench.DmrParams(
            bursts=cfg["dmr.bursts"],
            window=cfg["dmr.window"],
            min_flips=cfg["dmr.min-flips"],
            max_flips=cfg["dmr.max-flips"],
            operand_bits=cfg["dmr.operand-bits"],
            seed=cfg["seed"],
        )
    if name == "pipeline":
        return bench.PipelineParams(
            dim=cfg["pipeline.dim"],
            steps=cfg["pipeline.steps"],
            register_bits=cfg["pipeline.budget-bits"],
            gcd_rate=cfg["pipeline.gcd-rate"],
            matmul_cycles=cfg["pipeline.matmul-cycles"],
            queue_depth=cfg["pipeline.queue-depth"],
            weight_scale_bits=cfg["pipeline.weight-scale-bits"],
            seed=cfg["seed"],
        )
    raise ValueError(f"unknown experiment {name!r}")


RUNNERS = {
    "logistic": bench.run_logistic,
    "drift": bench.run_drift,
    "gradient": bench.run_gradient,
    "needle": bench.run_needle,
    "scale": bench.run_scale,
    "ringcost": bench.run_ring_cost,
    "associativity": bench.run_associativity,
    "dmr": bench.run_dmr,
    "pipeline": bench.run_pipeline,
}


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")


def run_command(command: str, cfg: dict, out_dir: Path) -> dict[str, str]:
    names = EXPERIMENTS if command == "all" else (command,)
    extras: dict[str, str] = {}
    for name in names:
        output = RUNNERS[name](_params(name, cfg))
        write_csv(out_dir / f"{output.name}.csv", output.header, output.rows)
        for k, v in output.meta.items():
            extras[f"{output.name}.{k}"] = v
    return extras


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _collect_overrides(args)
        file_pairs = parse_config_file(args.config) if args.config else None
        cfg = resolve_config(file_pairs, overrides)
    except ConfigError as exc:
        print(f"halo: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out or os.environ.get("HALO_OUT") or "./results")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        extras = run_command(args.command, cfg, out_dir)
        write_meta(out_dir / "meta.txt", cfg, extras)
    except Exception as exc:  # experiment failures exit 1, not a traceback
        print(f"halo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
