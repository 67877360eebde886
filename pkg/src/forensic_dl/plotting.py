"""Figures for evaluation and cross-validation reports, written to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .learner import LooResult  # noqa: E402
from .metrics import AggregateReport  # noqa: E402


def plot_report(report: AggregateReport, path) -> Path:
    """Grouped bars of per-class precision, recall and F1."""
    path = Path(path)
    names = [c.name for c in report.classes]
    series = {
        "precision": [c.precision for c in report.classes],
        "recall": [c.recall for c in report.classes],
        "F1": [c.f1 for c in report.classes],
    }
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(names)), 4))
    width = 0.27
    for k, (label, values) in enumerate(series.items()):
        xs = [i + (k - 1) * width for i in range(len(names))]
        ax.bar(xs, values, width, label=label)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    if report.micro:
        ax.set_title("micro P/R/F1 = {:.3f} / {:.3f} / {:.3f}".format(*report.micro))
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_loo(result: LooResult, path) -> Path:
    """Per-fold precision and recall with the fold averages as dashed lines."""
    path = Path(path)
    idx = [f.index for f in result.folds]
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(idx)), 3.5))
    ax.plot(idx, [f.precision for f in result.folds], "o-", label="precision")
    ax.plot(idx, [f.recall for f in result.folds], "s--", label="recall")
    ax.axhline(result.precision, color="C0", lw=0.8, ls=":")
    ax.axhline(result.recall, color="C1", lw=0.8, ls=":")
    ax.set_xlabel("fold")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"{result.target}: leave-one-out")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
