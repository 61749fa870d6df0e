"""
Experiments: synthetic corpora, ablation suites and sweep plots.
"""

from graphscribe.experiments.ablation import SUITES, AblationTable, Variant, run_suite, suite_variants
from graphscribe.experiments.plotting import plot_size_buckets, plot_window_sweep
from graphscribe.experiments.synthetic import (
    RELATIONS,
    entity_pool,
    feature_ordered_graphs,
    split_corpus,
    synthetic_corpus,
)

__all__ = [
    "SUITES",
    "AblationTable",
    "Variant",
    "run_suite",
    "suite_variants",
    "plot_size_buckets",
    "plot_window_sweep",
    "RELATIONS",
    "entity_pool",
    "feature_ordered_graphs",
    "split_corpus",
    "synthetic_corpus",
]
