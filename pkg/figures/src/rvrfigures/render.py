"""Render engine CSVs to images.

Consumes only the engine's documented CSV schemas — a strategy-sweep or
cost-cube summary table, or a single-run value series — and never touches
the engine itself.  Colour scales are auto-ranged with the numeric range
printed on the colourbar; heatmaps use a diverging palette centred at
RVR = 0 so over/under-performance is visually signed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("heatmap", "histogram", "timeseries", "cube-slices")

_REQUIRED = {
    "heatmap": ("memory_days", "k", "scaled_rvr"),
    "histogram": ("scaled_rvr",),
    "timeseries": ("step", "V_pool", "V_cex", "V_lvr"),
    "cube-slices": ("gamma_bps", "gas_usd", "tau_cex_bps", "scaled_rvr"),
}


class RenderError(ValueError):
    pass


class MissingColumnError(RenderError):
    def __init__(self, path, columns):
        self.columns = tuple(columns)
        super().__init__(f"{path}: missing required column(s): {', '.join(columns)}")


def load_table(path: str, kind: str) -> pd.DataFrame:
    if kind not in KINDS:
        raise RenderError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError as exc:
        raise RenderError(f"{path}: empty CSV") from exc
    missing = [c for c in _REQUIRED[kind] if c not in df.columns]
    if missing:
        raise MissingColumnError(path, missing)
    if df.empty:
        raise RenderError(f"{path}: CSV has a header but no rows")
    return df


def _diverging_norm(values: np.ndarray):
    span = float(np.max(np.abs(values))) or 1.0
    return matplotlib.colors.TwoSlopeNorm(vmin=-span, vcenter=0.0, vmax=span)


def _pivot(df: pd.DataFrame, y: str, x: str, value: str) -> pd.DataFrame:
    return df.pivot_table(index=y, columns=x, values=value, aggfunc="mean")


def _span(values) -> tuple:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:  # single-level axis: give the cell a visible extent
        pad = abs(lo) * 0.5 or 0.5
        return lo - pad, hi + pad
    return lo, hi


def _draw_heatmap(ax, grid: pd.DataFrame, norm, xlabel: str, ylabel: str):
    im = ax.imshow(
        grid.to_numpy(),
        origin="lower",
        aspect="auto",
        cmap="RdBu_r",
        norm=norm,
        extent=(*_span(grid.columns), *_span(grid.index)),
    )
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return im


def _rvr_label(values: np.ndarray) -> str:
    return f"scaled RVR (range {values.min():.3g} .. {values.max():.3g})"


def render_heatmap(df: pd.DataFrame, out_path: str) -> None:
    """Strategy grid: memory (days) x aggressiveness k, coloured by RVR."""
    grid = _pivot(df, "memory_days", "k", "scaled_rvr")
    fig, ax = plt.subplots(figsize=(7, 5.5))
    im = _draw_heatmap(ax, grid, _diverging_norm(grid.to_numpy()),
                       "aggressiveness k", "memory (days)")
    vals = df["scaled_rvr"].to_numpy()
    fig.colorbar(im, ax=ax, label=_rvr_label(vals))
    ax.set_title(f"Pool vs CEX rebalancing: {grid.size} strategies")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_histogram(df: pd.DataFrame, out_path: str) -> None:
    """Density of scaled RVR across all rows of a summary table."""
    vals = df["scaled_rvr"].to_numpy()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.hist(vals, bins=min(60, max(5, len(vals) // 5)), density=True,
            color="#4878a8", edgecolor="white")
    ax.axvline(0.0, color="black", lw=1, ls="--")
    ax.set_xlabel(_rvr_label(vals))
    ax.set_ylabel("density")
    ax.set_title(f"RVR distribution over {len(vals)} runs")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_timeseries(df: pd.DataFrame, out_path: str) -> None:
    """Cumulative returns of the pool, the CEX portfolio and the
    frictionless reference from a single-run value series."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    step = df["step"].to_numpy()
    for col, label, color in (
        ("V_pool", "pool", "#c23b22"),
        ("V_cex", "cex", "#2e6da4"),
        ("V_lvr", "frictionless reference", "#7a7a7a"),
    ):
        v = df[col].to_numpy()
        ax.plot(step, v / v[0] - 1.0, label=label, color=color, lw=1.2)
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative return")
    ax.legend()
    ax.set_title("Cumulative returns")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_cube_slices(df: pd.DataFrame, out_path: str) -> None:
    """Three orthogonal slices through the cost cube, each at the median
    level of the held-out axis."""
    axes_cols = ("gamma_bps", "gas_usd", "tau_cex_bps")
    labels = {
        "gamma_bps": "pool fee (bps)",
        "gas_usd": "gas cost (USD)",
        "tau_cex_bps": "CEX commission (bps)",
    }
    norm = _diverging_norm(df["scaled_rvr"].to_numpy())
    fig, axs = plt.subplots(1, 3, figsize=(15, 4.6))
    im = None
    for ax, held in zip(axs, axes_cols):
        x, y = [c for c in axes_cols if c != held]
        levels = np.sort(df[held].unique())
        level = levels[len(levels) // 2]
        sliced = df[df[held] == level]
        grid = _pivot(sliced, y, x, "scaled_rvr")
        im = _draw_heatmap(ax, grid, norm, labels[x], labels[y])
        ax.set_title(f"{labels[held]} = {level:g}")
    fig.colorbar(im, ax=list(axs), label=_rvr_label(df["scaled_rvr"].to_numpy()))
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


_RENDERERS = {
    "heatmap": render_heatmap,
    "histogram": render_histogram,
    "timeseries": render_timeseries,
    "cube-slices": render_cube_slices,
}


def render(kind: str, in_path: str, out_path: str) -> None:
    """Load ``in_path`` per the schema for ``kind`` and write the image."""
    df = load_table(in_path, kind)
    _RENDERERS[kind](df, out_path)
