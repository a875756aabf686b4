"""File outputs for evaluation runs: JSON and CSV records plus rendered
figures, written side by side so a run leaves both machine- and
human-readable artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from trialtables.evaluate import ConfusionMatrix, MetricsReport

_BAR_COLOURS = ("#4878d0", "#ee854a", "#6acc64")


def metrics_csv_text(report: MetricsReport) -> str:
    """Per-label counts and scores as delimited text, overall last."""
    lines = ["label,tp,fp,fn,p,r,f1"]
    rows = [(label, report.per_label[label]) for label in sorted(report.per_label)]
    rows.append(("overall", report.overall))
    for label, m in rows:
        lines.append(
            f"{label},{m.tp},{m.fp},{m.fn},"
            f"{m.precision:.4f},{m.recall:.4f},{m.f1:.4f}"
        )
    return "\n".join(lines) + "\n"


def save_metrics_figure(report: MetricsReport, path: str | Path) -> None:
    """Grouped precision/recall/F1 bars per label, overall included."""
    labels = sorted(report.per_label) + ["overall"]
    metrics = [report.per_label[l] for l in labels[:-1]] + [report.overall]
    x = np.arange(len(labels))
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(labels)), 3.2))
    series = (
        ("precision", [m.precision for m in metrics]),
        ("recall", [m.recall for m in metrics]),
        ("F1", [m.f1 for m in metrics]),
    )
    for i, (name, values) in enumerate(series):
        ax.bar(x + (i - 1) * width, values, width, label=name, color=_BAR_COLOURS[i])
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"task: {report.task}")
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_confusion_figure(matrix: ConfusionMatrix, path: str | Path) -> None:
    """Row-normalized heatmap with per-cell values."""
    norm = matrix if matrix.normalized else matrix.normalize()
    n = len(norm.labels)
    fig, ax = plt.subplots(figsize=(1.0 + 0.9 * n, 0.8 + 0.9 * n))
    im = ax.imshow(norm.counts, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(n))
    ax.set_yticks(range(n))
    ax.set_xticklabels(norm.labels, rotation=45, ha="right")
    ax.set_yticklabels(norm.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    for i in range(n):
        for j in range(n):
            value = norm.counts[i, j]
            colour = "white" if value > 0.5 else "black"
            ax.text(j, i, f"{value:.2f}", ha="center", va="center", color=colour, fontsize=8)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_metrics_outputs(report: MetricsReport, out_dir: str | Path, stem: str) -> dict[str, Path]:
    """Write `<stem>.json`, `<stem>.csv` and `<stem>.png` for one report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / f"{stem}.json",
        "csv": out_dir / f"{stem}.csv",
        "png": out_dir / f"{stem}.png",
    }
    paths["json"].write_text(
        json.dumps(report.to_record(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    paths["csv"].write_text(metrics_csv_text(report), encoding="utf-8")
    save_metrics_figure(report, paths["png"])
    return paths


def write_confusion_outputs(
    matrix: ConfusionMatrix, out_dir: str | Path, stem: str
) -> dict[str, Path]:
    """Write raw-count CSV and heatmap PNG for one confusion matrix."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out_dir / f"{stem}.csv", "png": out_dir / f"{stem}.png"}
    paths["csv"].write_text(matrix.to_csv_text(), encoding="utf-8")
    save_confusion_figure(matrix, paths["png"])
    return paths
