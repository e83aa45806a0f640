"""Turn sweep CSV files into figure-style images.

Two kinds: (eta, t) heatmaps of a witness or robustness column, and line plots
of selected columns against time (optionally one panel per column, matching the
two-panel decoherence-rate layout).  Rendering is read-only and byte-stable:
the same CSV renders to the same image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import load_sweep_csv

__all__ = ["PlotError", "PlotSpec", "build_figure", "render"]

# Fixed hash salt keeps SVG element ids reproducible across runs.
matplotlib.rcParams["svg.hashsalt"] = "coldbell-plots"

# Diverging scales sit at the local bound of each witness column.
_LOCAL_BOUNDS = {"wwzb": 1.0, "gtnl": 0.0, "horodecki_B": 0.0}


class PlotError(ValueError):
    """The plot spec does not match the data."""


@dataclass
class PlotSpec:
    """What to draw: input CSV, figure kind and column selections."""

    input: str
    kind: str  # "heatmap" | "lines"
    out: str
    value: str | None = None  # heatmap color column
    columns: tuple[str, ...] = ()  # line columns
    x: str = "t"
    y: str = "eta"
    xlabel: str | None = None
    ylabel: str | None = None
    title: str | None = None
    panels: bool = False

    @classmethod
    def from_json(cls, path) -> "PlotSpec":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        columns = tuple(payload.pop("columns", ()))
        return cls(columns=columns, **payload)


def _column(rows, name):
    return np.array([np.nan if row[name] is None else row[name] for row in rows])


def _require_columns(rows, names):
    if not rows:
        raise PlotError("no data rows in input CSV")
    missing = [name for name in names if name not in rows[0]]
    if missing:
        raise PlotError(f"columns not present in CSV: {missing}")


def _revival_times(meta, t_max):
    omega = meta.get("revival_omega")
    if omega is None:
        return []
    omega = float(omega)
    times = []
    n = 1
    while 2.0 * np.pi * n / omega <= t_max:
        times.append(2.0 * np.pi * n / omega)
        n += 1
    return times


def _heatmap(spec: PlotSpec, meta, rows, fig, ax):
    value = spec.value or "wwzb"
    _require_columns(rows, [spec.x, spec.y, value])
    xs = np.unique(_column(rows, spec.x))
    ys = np.unique(_column(rows, spec.y))
    if len(xs) < 2 or len(ys) < 2:
        raise PlotError(
            f"degenerate grid for a heatmap: {len(ys)} x {len(xs)} cells; need at least 2 x 2"
        )
    grid = np.full((len(ys), len(xs)), np.nan)
    x_index = {v: k for k, v in enumerate(xs)}
    y_index = {v: k for k, v in enumerate(ys)}
    for row in rows:
        if row[value] is not None:
            grid[y_index[row[spec.y]], x_index[row[spec.x]]] = row[value]

    center = _LOCAL_BOUNDS.get(value)
    if center is not None and np.any(np.isfinite(grid)):
        span = np.nanmax(np.abs(grid - center))
        span = span if span > 0 else 1.0
        mesh = ax.pcolormesh(
            xs, ys, grid, cmap="RdBu_r", vmin=center - span, vmax=center + span,
            shading="nearest",
        )
    else:
        mesh = ax.pcolormesh(xs, ys, grid, cmap="viridis", shading="nearest")
    fig.colorbar(mesh, ax=ax, label=value)
    for t_rev in _revival_times(meta, float(np.max(xs))):
        ax.axvline(t_rev, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel(spec.xlabel or f"{spec.x} [1/J]")
    ax.set_ylabel(spec.ylabel or f"{spec.y} [J]")


def _lines(spec: PlotSpec, meta, rows, fig, axes):
    columns = spec.columns or ("wwzb",)
    _require_columns(rows, [spec.x, *columns])
    xs = _column(rows, spec.x)
    if len(np.unique(xs)) < 2:
        raise PlotError("degenerate line plot: need at least two distinct abscissae")
    for ax, name in zip(axes, columns if spec.panels else [None]):
        targets = [name] if spec.panels else columns
        for column in targets:
            ax.plot(xs, _column(rows, column), label=column, linewidth=1.2)
        ax.set_xlabel(spec.xlabel or f"{spec.x} [1/J]")
        if spec.panels:
            ax.set_ylabel(name)
        else:
            ax.set_ylabel(spec.ylabel or "value")
            if len(targets) > 1:
                ax.legend()


def build_figure(spec: PlotSpec):
    """Build the matplotlib figure for a spec; raises PlotError on bad input."""
    if spec.kind not in ("heatmap", "lines"):
        raise PlotError(f"unknown plot kind {spec.kind!r}")
    meta, rows = load_sweep_csv(spec.input)
    if spec.kind == "heatmap":
        fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
        _heatmap(spec, meta, rows, fig, ax)
        axes = [ax]
    else:
        n_panels = len(spec.columns) if spec.panels and spec.columns else 1
        fig, axes = plt.subplots(
            1, n_panels, figsize=(4.5 * n_panels, 3.4), constrained_layout=True,
            squeeze=False,
        )
        axes = list(axes[0])
        _lines(spec, meta, rows, fig, axes)
    if spec.title:
        fig.suptitle(spec.title)
    return fig, axes


def render(spec: PlotSpec) -> Path:
    """Render the spec to its output path (PNG or SVG by extension)."""
    fig, _ = build_figure(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        if out.suffix.lower() == ".svg":
            # drop the creation date so identical inputs give identical bytes
            fig.savefig(out, metadata={"Date": None})
        else:
            fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return out
