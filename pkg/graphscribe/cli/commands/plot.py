"""
Plot Command - Render sweep charts from ablation tables
"""

from pathlib import Path

from graphscribe.cli.utils import success
from graphscribe.errors import ConfigError
from graphscribe.experiments.plotting import plot_size_buckets, plot_window_sweep

PLOT_KINDS = ("window", "sizes")


def render_plot(kind: str, csv_path: Path, output: Path, metric: str = "bleu4") -> Path:
    if kind == "window":
        path = plot_window_sweep(csv_path, output, metric)
    elif kind == "sizes":
        path = plot_size_buckets(csv_path, output)
    else:
        raise ConfigError(f"Unknown plot kind '{kind}'. Available: {', '.join(PLOT_KINDS)}")
    success(f"Plot saved to {path}")
    return path
