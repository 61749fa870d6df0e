"""
Ablation suites: train and evaluate each variant under a shared seed set and
collect the scores into one table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from graphscribe.errors import ConfigError
from graphscribe.evaluation.harness import EvaluationHarness, MetricsReport
from graphscribe.evaluation.metrics import SIZE_BUCKETS
from graphscribe.supervision.sidecar import SupervisionRecord
from graphscribe.supervision.tagging import Tagset
from graphscribe.training.batching import build_record_vocab
from graphscribe.training.config import ExperimentConfig
from graphscribe.training.trainer import Trainer

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["bleu4", "rouge_l", "chrf_pp", "cider", "order_exact_match", "order_kendall_tau"]


@dataclass(frozen=True)
class Variant:
    name: str
    overrides: Dict[str, Any] = field(default_factory=dict)


SUITES: Dict[str, List[Variant]] = {
    "copy": [
        Variant("full"),
        Variant("no_cp", {"train.ablation.no_cp": True}),
        Variant("no_pos", {"train.ablation.no_pos": True}),
        Variant("no_sc", {"train.ablation.no_sc": True}),
        Variant("no_pos_sc", {"train.ablation.no_pos": True, "train.ablation.no_sc": True}),
    ],
    "order": [
        Variant(mode, {"train.ablation.order_mode": mode})
        for mode in ("learned", "node_level", "random", "gold", "input")
    ],
    "window": [Variant(f"window_{w}", {"model.window_size": w}) for w in range(1, 6)],
    "pos_scope": [Variant(scope, {"model.pos_scope": scope}) for scope in ("local", "global")],
}

# (better, worse) pairs expected to hold on average
EXPECTED_DIRECTIONS: Dict[str, List[tuple]] = {
    "copy": [("full", "no_cp")],
    "order": [("gold", "random")],
}


def suite_variants(suite: str) -> List[Variant]:
    if suite not in SUITES:
        raise ConfigError(f"Unknown ablation suite '{suite}'. Available: {', '.join(SUITES)}")
    return SUITES[suite]


@dataclass
class AblationTable:
    """One row per variant and seed."""
    suite: str
    rows: pd.DataFrame
    failures: List[str] = field(default_factory=list)
    paths: Dict[str, Path] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def aggregate(self) -> pd.DataFrame:
        """Mean and standard deviation of every metric per variant, in suite order."""
        order = [v.name for v in SUITES.get(self.suite, [])]
        grouped = self.rows.groupby("variant", sort=False)[METRIC_COLUMNS].agg(["mean", "std"])
        grouped.columns = [f"{metric}_{stat}" for metric, stat in grouped.columns]
        if order:
            grouped = grouped.reindex([name for name in order if name in grouped.index])
        return grouped.reset_index()

    def size_buckets(self) -> pd.DataFrame:
        """Long-form BLEU-4 per variant, seed and graph-size bucket."""
        columns = [f"bleu4_{bucket}" for bucket in SIZE_BUCKETS if f"bleu4_{bucket}" in self.rows]
        frame = self.rows[["variant", "seed"] + columns].melt(
            id_vars=["variant", "seed"], value_vars=columns, var_name="bucket", value_name="bleu4"
        )
        frame["bucket"] = frame["bucket"].str.replace("bleu4_", "", regex=False)
        return frame.dropna(subset=["bleu4"])

    def check_directions(self) -> List[str]:
        """Expected orderings that fail per seed or on the mean; logged, never raised."""
        failures = []
        for better, worse in EXPECTED_DIRECTIONS.get(self.suite, []):
            b = self.rows[self.rows["variant"] == better].set_index("seed")["bleu4"]
            w = self.rows[self.rows["variant"] == worse].set_index("seed")["bleu4"]
            for seed in sorted(set(b.index) & set(w.index)):
                if not b[seed] > w[seed]:
                    failures.append(f"seed {seed}: {better} ({b[seed]:.2f}) <= {worse} ({w[seed]:.2f})")
            if len(b) and len(w) and not b.mean() > w.mean():
                failures.append(f"mean: {better} ({b.mean():.2f}) <= {worse} ({w.mean():.2f})")
        for failure in failures:
            logger.warning(f"Ablation direction not met in suite '{self.suite}': {failure}")
        self.failures = failures
        return failures

    def save(self, output_dir: Path) -> Dict[str, Path]:
        """Write per-seed rows and the aggregated view as CSV and markdown."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "rows_csv": output_dir / f"ablation_{self.suite}.csv",
            "summary_csv": output_dir / f"ablation_{self.suite}_summary.csv",
            "markdown": output_dir / f"ablation_{self.suite}.md",
            "buckets_csv": output_dir / f"ablation_{self.suite}_buckets.csv",
        }
        summary = self.aggregate()
        self.rows.to_csv(paths["rows_csv"], index=False, float_format="%.4f")
        summary.to_csv(paths["summary_csv"], index=False, float_format="%.4f")
        self.size_buckets().to_csv(paths["buckets_csv"], index=False, float_format="%.4f")
        with open(paths["markdown"], "w") as f:
            f.write(f"# Ablation: {self.suite}\n\n")
            f.write(summary.to_markdown(index=False, floatfmt=".2f"))
            f.write("\n\n## Per seed\n\n")
            f.write(self.rows.to_markdown(index=False, floatfmt=".2f"))
            f.write("\n")
        logger.info(f"Wrote ablation table for '{self.suite}' to {output_dir}")
        self.paths = paths
        return paths


def report_row(suite: str, variant: Variant, seed: int, report: MetricsReport, config: ExperimentConfig) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "suite": suite,
        "variant": variant.name,
        "seed": seed,
        "order_mode": config.train.ablation.order_mode.value,
        "window_size": config.model.window_size,
        "pos_scope": config.model.pos_scope.value,
    }
    row.update({metric: getattr(report, metric) for metric in METRIC_COLUMNS})
    for bucket in SIZE_BUCKETS:
        row[f"bleu4_{bucket}"] = report.size_buckets.get(bucket, {}).get("bleu4")
    return row


def run_variant(
    config: ExperimentConfig,
    variant: Variant,
    seed: int,
    train_records: Sequence[SupervisionRecord],
    eval_records: Sequence[SupervisionRecord],
    tagset: Tagset,
    run_dir: Path,
    beam: int = 5,
    device: str = "cpu",
) -> tuple:
    """Train one variant with one seed and evaluate it under its own order mode."""
    resolved = config.with_overrides({**variant.overrides, "train.seed": seed})
    vocab = build_record_vocab(train_records, resolved.data.min_count, resolved.data.max_size)
    trainer = Trainer(resolved, vocab, tagset, Path(run_dir) / variant.name / f"seed{seed}", device=device)
    trainer.fit(train_records)
    harness = EvaluationHarness(
        trainer.model, vocab, order_mode=resolved.train.ablation.order_mode, beam=beam, seed=seed
    )
    return resolved, harness.evaluate(eval_records)


def run_suite(
    config: ExperimentConfig,
    suite: str,
    seeds: Sequence[int],
    train_records: Sequence[SupervisionRecord],
    eval_records: Sequence[SupervisionRecord],
    tagset: Tagset,
    output_dir: Path,
    beam: int = 5,
    device: str = "cpu",
    variants: Optional[Sequence[str]] = None,
) -> AblationTable:
    """
    Run every variant of ``suite`` once per seed.

    Args:
        config: Base experiment config; variant overrides are applied on top
        suite: copy, order, window or pos_scope
        seeds: Shared seed set
        train_records: Training supervision
        eval_records: Evaluation supervision
        tagset: Tagset of the supervision
        output_dir: Where run directories and tables go
        beam: Beam width for evaluation
        device: Torch device
        variants: Optional subset of variant names

    Returns:
        AblationTable with len(variants) x len(seeds) rows
    """
    selected = suite_variants(suite)
    if variants:
        unknown = set(variants) - {v.name for v in selected}
        if unknown:
            raise ConfigError(f"Unknown variants for suite '{suite}': {', '.join(sorted(unknown))}")
        selected = [v for v in selected if v.name in variants]
    if not seeds:
        raise ConfigError("At least one seed is required")

    rows = []
    for variant in selected:
        for seed in seeds:
            logger.info(f"[{suite}] variant {variant.name}, seed {seed}")
            resolved, report = run_variant(
                config, variant, seed, train_records, eval_records, tagset,
                Path(output_dir) / "runs", beam=beam, device=device,
            )
            rows.append(report_row(suite, variant, seed, report, resolved))

    table = AblationTable(suite=suite, rows=pd.DataFrame(rows))
    table.check_directions()
    table.save(output_dir)
    return table
