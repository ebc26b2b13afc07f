"""Figures for bench reports, rendered off-screen to files."""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .bench import BenchReport

__all__ = ["plot_report"]


def plot_report(report: BenchReport, path, dpi: int = 120) -> None:
    """Two panels: per-op calculation time (log scale) and naive/accelerated speedup.

    The format follows the file suffix (png, pdf, svg).  Uses its own
    Figure and Agg canvas, so it is safe to call from worker threads.
    """
    fig = Figure(figsize=(8.0, 3.4))
    FigureCanvasAgg(fig)
    ax_t, ax_s = fig.subplots(1, 2)
    names = [s.name for s in report.sections]
    pos = np.arange(len(names))
    if names:
        acc = [s.accelerated.calc_speed_us for s in report.sections]
        nai = [s.naive.calc_speed_us for s in report.sections]
        ax_t.bar(pos - 0.2, acc, 0.4, label="accelerated", color="0.25")
        ax_t.bar(pos + 0.2, nai, 0.4, label="naive", color="0.7")
        ax_t.set_yscale("log")
        ax_t.legend(frameon=False, fontsize=8)
        speed = [s.speedup for s in report.sections]
        ax_s.bar(pos, speed, 0.5, color=["0.25" if v >= 1 else "0.6" for v in speed])
        ax_s.axhline(1.0, color="k", lw=0.6)
        for x, v in zip(pos, speed):
            ax_s.annotate(f"{v:.3g}x", (x, v), ha="center", va="bottom", fontsize=7)
    for ax in (ax_t, ax_s):
        ax.set_xticks(pos)
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    ax_t.set_ylabel("calculation time (us)")
    ax_s.set_ylabel("speedup (naive / accelerated)")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
