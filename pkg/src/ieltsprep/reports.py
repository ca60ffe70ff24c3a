"""Benchmark report rendering: canonical JSON plus advisory plot images.

The JSON file is the machine contract; images mirror it for human review
and are never parsed by tests.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metrics import ConfusionMatrix, MetricsReport, StatsReport

PLOT_KINDS = ("scatter", "box", "histogram", "residual", "confusion")


def _plot(kind, preds, labels, deltas, matrix, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    if kind == "scatter":
        ax.scatter(labels, preds, alpha=0.6, s=18)
        ax.plot([1, 9], [1, 9], "k--", linewidth=1)
        ax.set_xlabel("Actual band")
        ax.set_ylabel("Predicted band")
        ax.set_title("Actual vs predicted band scores")
    elif kind == "box":
        ax.boxplot([labels, preds], tick_labels=["actual", "predicted"])
        ax.set_ylabel("Band")
        ax.set_title("Score distributions")
    elif kind == "histogram":
        ax.hist(deltas, bins=15, alpha=0.8)
        ax.axvline(float(np.mean(deltas)), color="red", linestyle="--",
                   label=f"mean {float(np.mean(deltas)):+.3f}")
        ax.legend()
        ax.set_xlabel("Score change")
        ax.set_title("Score improvement distribution")
    elif kind == "residual":
        ax.scatter(labels, np.asarray(preds) - np.asarray(labels), alpha=0.6, s=18)
        ax.axhline(0.0, color="k", linewidth=1)
        ax.set_xlabel("Actual band")
        ax.set_ylabel("Residual (pred - actual)")
        ax.set_title("Residuals")
    elif kind == "confusion":
        counts = np.array(matrix.counts)
        image = ax.imshow(counts, cmap="Blues", origin="lower")
        ticks = range(len(matrix.bins))
        ax.set_xticks(ticks, [f"{b:g}" for b in matrix.bins], rotation=90, fontsize=6)
        ax.set_yticks(ticks, [f"{b:g}" for b in matrix.bins], fontsize=6)
        ax.set_xlabel("Actual band")
        ax.set_ylabel("Predicted band")
        ax.set_title("Confusion matrix")
        fig.colorbar(image)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def render_report(
    out_dir: str | Path,
    metrics: MetricsReport | None = None,
    stats: StatsReport | None = None,
    matrix: ConfusionMatrix | None = None,
    preds=None,
    labels=None,
    deltas=None,
    plots=PLOT_KINDS,
    extra: dict | None = None,
) -> Path:
    """Write report.json (exact numbers) and the requested PNGs.

    Returns the JSON path. Pure function of its inputs: identical inputs
    produce identical JSON.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    payload: dict = {}
    if metrics is not None:
        payload["metrics"] = metrics.to_dict()
    if stats is not None:
        payload["stats"] = stats.to_dict()
        payload["stats"]["mean_delta_marker"] = stats.mean_delta
    if matrix is not None:
        payload["confusion"] = matrix.to_dict()
    if extra:
        payload.update(extra)
    json_path = out_dir / "report.json"
    with json_path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)

    if deltas is None and stats is not None and preds is not None and labels is not None:
        deltas = list(np.asarray(preds) - np.asarray(labels))
    for kind in plots:
        if kind == "confusion" and matrix is None:
            continue
        if kind == "histogram" and deltas is None:
            continue
        if kind in ("scatter", "box", "residual") and (preds is None or labels is None):
            continue
        _plot(kind, preds, labels, deltas, matrix, out_dir / f"{kind}.png")
    return json_path


def compare_runs(run_dirs) -> dict:
    """Side-by-side deltas of the headline metrics across benchmark runs."""
    rows = {}
    for run_dir in run_dirs:
        path = Path(run_dir) / "report.json"
        with path.open(encoding="utf-8") as fh:
            rows[Path(run_dir).name] = json.load(fh).get("metrics", {})
    names = list(rows)
    comparison = {"runs": rows}
    if len(names) >= 2:
        first, last = rows[names[0]], rows[names[-1]]
        comparison["delta"] = {
            key: last[key] - first[key]
            for key in ("mae", "r2", "exact_pct", "within05_pct", "within10_pct")
            if key in first and key in last
        }
    return comparison
