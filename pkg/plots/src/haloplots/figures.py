"""Render the benchmark CSV files into error-curve figures.

Input files are read-only; the only transformation applied is a display
floor for exact-zero errors so they stay visible on a log axis.  The
stored data keeps the true zeros.  Rendering is deterministic: fixed
figure geometry, pinned SVG hash salt, no timestamps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

matplotlib.rcParams["svg.hashsalt"] = "halo-plots"

DISPLAY_FLOOR = 1e-30

SERIES_STYLE = {
    "BF16": {"color": "#c02020", "linestyle": "-"},
    "FP32": {"color": "#e08020", "linestyle": "-"},
    "EXACT": {"color": "#2040c0", "linestyle": "--"},
    "on": {"color": "#208040", "linestyle": "-"},
    "off": {"color": "#808080", "linestyle": ":"},
}


class RenderError(Exception):
    pass


@dataclass(frozen=True)
class FigureSpec:
    experiment: str
    x_column: str
    y_column: str
    title: str
    x_label: str
    y_label: str
    log_x: bool = False
    log_y: bool = True
    series_column: str = "regime"
    display_floor: float = DISPLAY_FLOOR
    output_stem: str = ""

    @property
    def stem(self) -> str:
        return self.output_stem or self.experiment


FIGURES = [
    FigureSpec(
        "drift", "step", "error",
        "Recursive state drift from the exact trajectory",
        "step", "max-norm error",
    ),
    FigureSpec(
        "logistic", "step", "error",
        "Chaotic-map divergence from the exact trajectory",
        "step", "absolute error",
        output_stem="survival",
    ),
    FigureSpec(
        "gradient", "step", "error",
        "Derivative-product deviation vs chain depth",
        "depth", "relative deviation",
    ),
    FigureSpec(
        "needle", "step", "error",
        "Recall error after long recursive propagation",
        "sequence length", "max-norm retrieval error",
        log_x=True,
    ),
    FigureSpec(
        "scale", "step", "error",
        "Sequential summation error vs layer width",
        "width", "mean absolute error",
        log_x=True,
    ),
    FigureSpec(
        "ringcost", "step", "bits",
        "State bit-width with and without re-grounding",
        "step", "max entry bits",
        log_y=False,
        series_column="ring",
    ),
]

SPEC_BY_EXPERIMENT = {spec.experiment: spec for spec in FIGURES}


def load_series(csv_path: Path, spec: FigureSpec) -> dict[str, tuple[list[float], list[float]]]:
    """Group (x, y) pairs by series label, in file order."""
    try:
        with open(csv_path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise RenderError(f"{csv_path}: empty CSV")
            for col in (spec.x_column, spec.y_column, spec.series_column):
                if col not in reader.fieldnames:
                    raise RenderError(f"{csv_path}: missing column {col!r}")
            series: dict[str, tuple[list[float], list[float]]] = {}
            for row in reader:
                xs, ys = series.setdefault(row[spec.series_column], ([], []))
                xs.append(float(row[spec.x_column]))
                ys.append(float(row[spec.y_column]))
    except OSError as exc:
        raise RenderError(f"cannot read {csv_path}: {exc}") from exc
    if not series:
        raise RenderError(f"{csv_path}: no data rows")
    return series


def floor_for_display(ys: list[float], floor: float) -> tuple[list[float], bool]:
    """Lift exact zeros to the display floor; report whether any were."""
    floored = [y if y > floor else floor for y in ys]
    return floored, any(y <= 0.0 for y in ys)


def render(csv_path: Path, spec: FigureSpec, out_dir: Path) -> list[Path]:
    """Write one PNG and one SVG for the figure; returns the paths."""
    series = load_series(csv_path, spec)
    fig, ax = plt.subplots(figsize=(7.0, 4.2), dpi=120)
    try:
        exact_floored = False
        for label in sorted(series):
            xs, ys = series[label]
            if spec.log_y:
                ys, had_zero = floor_for_display(ys, spec.display_floor)
                exact_floored = exact_floored or had_zero
            style = SERIES_STYLE.get(label, {})
            ax.plot(xs, ys, label=label, linewidth=1.4, **style)
        if spec.log_y:
            ax.set_yscale("log")
        if spec.log_x:
            ax.set_xscale("log")
        ax.set_title(spec.title)
        ax.set_xlabel(spec.x_label)
        ax.set_ylabel(spec.y_label)
        ax.legend(loc="best")
        if exact_floored:
            ax.annotate(
                f"zero error shown at {spec.display_floor:g}",
                xy=(0.02, 0.03),
                xycoords="axes fraction",
                fontsize=8,
                color="#404040",
            )
        fig.tight_layout()
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for ext in ("png", "svg"):
            target = out_dir / f"{spec.stem}.{ext}"
            fig.savefig(target, metadata={"Date": None} if ext == "svg" else None)
            written.append(target)
        return written
    finally:
        plt.close(fig)


def render_all(in_dir: Path, out_dir: Path, only: list[str] | None = None) -> list[Path]:
    chosen = FIGURES if not only else [
        SPEC_BY_EXPERIMENT[name] for name in only
    ]
    written: list[Path] = []
    for spec in chosen:
        written.extend(render(in_dir / f"{spec.experiment}.csv", spec, out_dir))
    return written
