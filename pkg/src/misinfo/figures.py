"""Report figures rendered to files (no display backend needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .corpus import CLASS_ORDER  # noqa: E402
from .ensemble import Metrics  # noqa: E402

_METRIC_KEYS = ("weighted_precision", "weighted_recall", "accuracy", "weighted_f1")
_METRIC_NAMES = ("precision", "recall", "accuracy", "F1")


def save_confusion_figure(metrics: Metrics, path: Union[str, Path]) -> Path:
    """Heatmap of the 2x2 confusion matrix with counts annotated."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    m = metrics.confusion
    im = ax.imshow(m, cmap="Blues")
    ax.set_xticks(range(len(CLASS_ORDER)), [f"pred {c}" for c in CLASS_ORDER])
    ax.set_yticks(range(len(CLASS_ORDER)), [f"gold {c}" for c in CLASS_ORDER])
    threshold = m.max() / 2 if m.max() else 0
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            color = "white" if m[i, j] > threshold else "black"
            ax.text(j, i, str(int(m[i, j])), ha="center", va="center", color=color)
    ax.set_title(f"confusion (n={metrics.count})")
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_metrics_figure(rows: Mapping[str, Metrics], path: Union[str, Path]) -> Path:
    """Grouped bars of weighted precision/recall/accuracy/F1 per model."""
    path = Path(path)
    names = list(rows)
    x = np.arange(len(_METRIC_KEYS))
    width = 0.8 / max(len(names), 1)
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for k, name in enumerate(names):
        values = [getattr(rows[name], key) for key in _METRIC_KEYS]
        ax.bar(x + k * width, values, width, label=name)
    ax.set_xticks(x + width * (len(names) - 1) / 2, _METRIC_NAMES)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_history_figure(history: Sequence, path: Union[str, Path]) -> Path:
    """Training loss and validation weighted F1 per epoch on twin axes."""
    path = Path(path)
    epochs = [rec.epoch for rec in history]
    fig, ax_loss = plt.subplots(figsize=(6.4, 3.6))
    ax_loss.plot(epochs, [rec.train_loss for rec in history],
                 color="tab:red", marker="o", label="train loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss", color="tab:red")
    ax_f1 = ax_loss.twinx()
    ax_f1.plot(epochs, [rec.valid_f1 for rec in history],
               color="tab:blue", marker="s", label="valid weighted F1")
    ax_f1.set_ylabel("weighted F1", color="tab:blue")
    ax_f1.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
