"""Figure rendering for benchmark reports and alignments.

The CLI writes these next to the delimited report output so a run is
immediately inspectable; everything here is also usable from a notebook.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import BenchReport
from .dtw import DtwOutcome

MODEL_STYLE = {
    "r-4m": ("#d62728", "s"),
    "knn-4m": ("#1f77b4", "o"),
    "knn-dtw": ("#2ca02c", "^"),
}

_X_LABELS = {
    "channel_count": "number of wavelengths",
    "k": "neighborhood size k",
    "window": "max warping window (ticks)",
}


def plot_report(report: BenchReport) -> plt.Figure:
    """MAPE vs channel count (or swept parameter), std across folds shaded."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    models = []
    for c in report.cells:
        if c.model not in models:
            models.append(c.model)
    for model in models:
        cells = sorted((c for c in report.cells if c.model == model), key=lambda c: c.x)
        xs = [c.x for c in cells]
        means = [c.mape_mean for c in cells]
        stds = [c.mape_std for c in cells]
        color, marker = MODEL_STYLE.get(model, ("#555555", "x"))
        ax.plot(xs, means, marker=marker, color=color, label=model)
        ax.fill_between(
            xs,
            [m - s for m, s in zip(means, stds)],
            [m + s for m, s in zip(means, stds)],
            color=color,
            alpha=0.18,
            linewidth=0,
        )
    ax.set_xlabel(_X_LABELS.get(report.x_label, report.x_label))
    ax.set_ylabel("MAPE (%)")
    ax.set_xticks(sorted({c.x for c in report.cells}))
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def plot_alignment(
    query: Sequence[float],
    other: Sequence[float],
    outcome: DtwOutcome,
    query_label: str = "query",
    other_label: str = "other",
) -> plt.Figure:
    """Two series with their warping-path point mapping drawn between them."""
    offset = max(max(query), max(other)) - min(min(query), min(other))
    offset = 1.2 * offset if offset > 0 else 1.0
    fig, ax = plt.subplots(figsize=(7, 4.5))
    hi = [v + offset for v in query]
    ax.plot(range(len(query)), hi, color="#1f77b4", lw=1.6, label=query_label)
    ax.plot(range(len(other)), other, color="#d62728", lw=1.6, label=other_label)
    for i, j in outcome.path:
        ax.plot([i, j], [hi[i], other[j]], color="0.75", lw=0.5, zorder=0)
    ax.set_xlabel("tick")
    ax.set_ylabel("intensity (offset for display)")
    ax.legend(loc="upper left")
    ax.set_title(f"DTW distance {outcome.distance:.4g}")
    fig.tight_layout()
    return fig


def save_figure(fig: plt.Figure, path: str | Path, dpi: int = 150) -> None:
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
