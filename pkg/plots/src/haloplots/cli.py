"""plots: render benchmark CSV files into PNG/SVG figures."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURES, SPEC_BY_EXPERIMENT, RenderError, render_all


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render halo benchmark CSV files into figures.",
    )
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding the benchmark CSV files")
    parser.add_argument("--out", dest="out_dir", required=True,
                        help="directory for the PNG/SVG output")
    parser.add_argument(
        "--only",
        default=None,
        help="comma list of experiments to render "
        f"(from: {','.join(s.experiment for s in FIGURES)})",
    )
    args = parser.parse_args(argv)
    only = None
    if args.only:
        only = [name.strip() for name in args.only.split(",") if name.strip()]
        unknown = [n for n in only if n not in SPEC_BY_EXPERIMENT]
        if unknown:
            print(f"plots: unknown experiments: {', '.join(unknown)}", file=sys.stderr)
            return 2
    try:
        written = render_all(Path(args.in_dir), Path(args.out_dir), only)
    except RenderError as exc:
        print(f"plots: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
