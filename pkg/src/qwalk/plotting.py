"""Matplotlib figures for fit reports, written as self-contained SVG files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
TARGET_COLOR = "#4c72b0"
TRAINED_COLOR = "#dd8452"

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    # fixed ids and no timestamp keep the SVG bytes reproducible
    "svg.hashsalt": "qwalk",
    "svg.fonttype": "path",
}


def _figure(width=6.0):
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def distribution_plot(labels, target, trained, path, title="", xlabel="bin"):
    """Target vs trained probabilities as side-by-side bars."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        x = np.arange(len(labels))
        w = 0.4
        ax.bar(x - w / 2, target, w, color=TARGET_COLOR, label="target")
        if trained is not None:
            ax.bar(x + w / 2, trained, w, color=TRAINED_COLOR, label="trained")
        step = max(1, len(labels) // 8)
        ax.set_xticks(x[::step])
        ax.set_xticklabels([f"{v:.3g}" for v in np.asarray(labels)[::step]])
        ax.set_xlabel(xlabel)
        ax.set_ylabel("probability")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def trace_plot(trace, path, title="error progression"):
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        trace = np.asarray(trace, dtype=float)
        ax.plot(np.arange(1, trace.size + 1), trace, color=TARGET_COLOR, lw=1.2)
        if trace.size and np.all(trace > 0):
            ax.set_yscale("log")
        ax.set_xlabel("objective evaluation")
        ax.set_ylabel("best loss so far")
        ax.set_title(title)
        _save(fig, path)


def boxplot_plot(losses, path, title="final loss over restarts"):
    with plt.rc_context(STYLE):
        fig, ax = _figure(4.0)
        vals = np.asarray(losses, dtype=float)
        ax.boxplot(vals[np.isfinite(vals)], widths=0.5)
        ax.set_xticks([])
        ax.set_ylabel("loss")
        ax.set_title(title)
        _save(fig, path)


def timing_plot(times, path, title="wall time per restart"):
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        times = np.asarray(times, dtype=float)
        ax.bar(np.arange(times.size), times, color=TARGET_COLOR)
        ax.axhline(times.mean(), color=TRAINED_COLOR, lw=1, ls="--", label=f"mean {times.mean():.3g} s")
        ax.set_xlabel("restart")
        ax.set_ylabel("seconds")
        ax.set_title(title)
        ax.legend(frameon=False)
        _save(fig, path)


def ascii_bars(labels, series: dict, width: int = 40) -> str:
    """Horizontal text bars, one row per bin and one glyph per series."""
    glyphs = "#*o+"
    peak = max(float(np.max(v)) for v in series.values()) or 1.0
    lines = ["  ".join(f"{g} {name}" for g, name in zip(glyphs, series))]
    for i, lab in enumerate(labels):
        for g, (name, vals) in zip(glyphs, series.items()):
            n = int(round(width * float(vals[i]) / peak))
            lines.append(f"{lab:>10.4g} {g * n:<{width}} {float(vals[i]):.4f}")
    return "\n".join(lines)
