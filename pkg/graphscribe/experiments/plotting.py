"""
Static charts for the window-size and graph-size sweeps.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from graphscribe.errors import DataError  # noqa: E402
from graphscribe.evaluation.metrics import SIZE_BUCKETS  # noqa: E402

logger = logging.getLogger(__name__)


def _read(path: Path, required) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError(f"Sweep file not found: {path}")
    frame = pd.read_csv(path)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path} is missing columns: {', '.join(missing)}")
    if frame.empty:
        raise DataError(f"{path} has no rows")
    return frame


def plot_window_sweep(csv_path: Path, output: Path, metric: str = "bleu4") -> Path:
    """
    Mean (and spread over seeds) of ``metric`` against the semantic window size.

    Args:
        csv_path: Per-seed rows with ``window_size`` and ``metric`` columns
        output: PNG path
        metric: Column to plot
    """
    frame = _read(csv_path, ["window_size", metric])
    stats = frame.groupby("window_size")[metric].agg(["mean", "std"]).reset_index().fillna(0.0)

    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.errorbar(stats["window_size"], stats["mean"], yerr=stats["std"], marker="o", capsize=3)
    ax.set_xlabel("Semantic window size")
    ax.set_ylabel(metric)
    ax.set_xticks(list(stats["window_size"]))
    ax.grid(True, alpha=0.3)

    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote window sweep plot to {output}")
    return output


def plot_size_buckets(csv_path: Path, output: Path) -> Path:
    """
    Grouped bars of BLEU-4 per graph-size bucket, one group per variant.

    Args:
        csv_path: Long-form rows with ``variant``, ``bucket`` and ``bleu4`` columns
        output: PNG path
    """
    frame = _read(csv_path, ["variant", "bucket", "bleu4"])
    frame["bucket"] = frame["bucket"].astype(str)
    table = frame.pivot_table(index="bucket", columns="variant", values="bleu4", aggfunc="mean")
    table = table.reindex([b for b in SIZE_BUCKETS if b in table.index])

    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)
    table.plot.bar(ax=ax, rot=0)
    ax.set_xlabel("Triplets per graph")
    ax.set_ylabel("BLEU-4")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(loc="best", fontsize=8)

    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150)
    plt.close(fig)
    logger.info(f"Wrote size bucket plot to {output}")
    return output
