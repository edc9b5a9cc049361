"""Human-readable tables and matplotlib figures for the report outputs.

Every report is emitted both as structured records and as a rendered
table; figures land next to them as PNG files with metadata stripped so
repeated runs stay byte-identical.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def error_breakdown_figure(
    fn_causes: Mapping[str, int], fp_causes: Mapping[str, int], path: str | Path
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [f"FN: {c}" for c in sorted(fn_causes)] + [f"FP: {c}" for c in sorted(fp_causes)]
    values = [fn_causes[c] for c in sorted(fn_causes)] + [fp_causes[c] for c in sorted(fp_causes)]
    if not labels:
        labels, values = ["no errors"], [0]
    ax.barh(range(len(labels)), values, color="#b23b3b")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("blocks")
    ax.set_title("Teaser detection errors by cause")
    fig.tight_layout()
    return _save(fig, path)


def threshold_sweep_figure(
    points: Sequence[tuple[float, float, float, float]],
    chosen: float,
    path: str | Path,
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    thresholds = [p[0] for p in points]
    ax.plot(thresholds, [p[1] for p in points], label="precision")
    ax.plot(thresholds, [p[2] for p in points], label="recall")
    ax.plot(thresholds, [p[3] for p in points], label="F1")
    ax.axvline(chosen, color="grey", linestyle="--", label=f"chosen t={chosen:.3f}")
    ax.set_xlabel("similarity threshold")
    ax.set_ylabel("metric")
    ax.set_ylim(0, 1.05)
    ax.set_title("Threshold calibration sweep")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def novelty_figure(novel_ngram: Mapping[int, float], compression: float, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = sorted(novel_ngram)
    ax.bar([str(n) for n in ns], [novel_ngram[n] for n in ns], color="#3b6fb2")
    ax.axhline(compression, color="grey", linestyle="--", label=f"compression {compression:.2f}")
    ax.set_xlabel("n")
    ax.set_ylabel("novel n-gram ratio")
    ax.set_ylim(0, 1.05)
    ax.set_title("Abstractivity of collected summaries")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def length_bands_figure(length_counts: Mapping[str, int], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(length_counts)
    ax.bar(labels, [length_counts[label] for label in labels], color="#4a9a62")
    ax.set_xlabel("summary length (words)")
    ax.set_ylabel("samples")
    ax.set_title("Summary length distribution")
    fig.tight_layout()
    return _save(fig, path)


def rouge_figure(scores: Mapping[str, float], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(scores)
    ax.bar(labels, [scores[label] for label in labels], color="#7a5ab2")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1.05)
    ax.set_title("Summary evaluation")
    fig.tight_layout()
    return _save(fig, path)
