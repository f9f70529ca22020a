"""Static SVG boxplots of per-trajectory RMSE and INC."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finite(values):
    v = np.asarray(values, dtype=float)
    return v[np.isfinite(v)]


def boxplot(report, metric, path, show_outliers=True):
    """Write one boxplot of ``metric`` ('rmse' or 'inc') for every filter."""
    data = [_finite(getattr(r, metric)) for r in report.rows]
    fig, ax = plt.subplots(figsize=(1.2 * len(data) + 2, 4))
    ax.boxplot(data, showfliers=show_outliers)
    ax.set_xticks(range(1, len(data) + 1), report.labels, rotation=30, ha="right")
    ax.set_ylabel(metric.upper())
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def write_boxplots(report, directory, stem="report"):
    """RMSE and INC boxplots with and without outliers; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for metric in ("rmse", "inc"):
        for flag, tag in ((True, "outliers"), (False, "no_outliers")):
            paths.append(boxplot(report, metric, os.path.join(directory, f"{stem}_{metric}_{tag}.svg"), flag))
    return paths
