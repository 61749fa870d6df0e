"""
Ablate Command - Run an ablation suite over a shared seed set
"""

from pathlib import Path
from typing import List, Optional, Tuple

from graphscribe.cli.manifest import RunManifest
from graphscribe.cli.utils import console, create_table, new_run_dir, success, warning
from graphscribe.errors import ConfigError
from graphscribe.experiments.ablation import AblationTable, run_suite, suite_variants
from graphscribe.experiments.synthetic import split_corpus, synthetic_corpus
from graphscribe.supervision.sidecar import SupervisionRecord, build_supervision, read_sidecar
from graphscribe.supervision.tagging import COARSE, Tagset, get_tagger
from graphscribe.training.config import ExperimentConfig, load_config


def synthetic_supervision(
    n_examples: int, config: ExperimentConfig, seed: int = 0
) -> Tuple[List[SupervisionRecord], List[SupervisionRecord]]:
    """Train and test supervision built from a synthetic star-graph corpus."""
    splits = split_corpus(synthetic_corpus(n_examples, seed=seed, max_triplets=config.data.n_slots))
    tagger = get_tagger(config.data.tagger)
    records = {
        split: [build_supervision(e, config.data.n_slots, tagger, COARSE) for e in splits[split]]
        for split in ("train", "test")
    }
    return records["train"], records["test"]


def print_summary(table: AblationTable):
    summary = table.aggregate()
    columns = [c for c in summary.columns if c.endswith("_mean")]
    view = create_table(f"Ablation: {table.suite}", ["Variant"] + [c[: -len("_mean")] for c in columns])
    for _, row in summary.iterrows():
        view.add_row(row["variant"], *[f"{row[c]:.2f}" for c in columns])
    console.print(view)


def run_ablation(
    suite: str,
    seeds: List[int],
    config_path: Optional[Path] = None,
    output_dir: Optional[Path] = None,
    beam: int = 5,
    variants: Optional[List[str]] = None,
    synthetic: Optional[int] = None,
    corpus_seed: int = 0,
    epochs: Optional[int] = None,
    device: str = "cpu",
) -> AblationTable:
    """
    Train and evaluate every variant of ``suite`` once per seed.

    Args:
        suite: copy, order, window or pos_scope
        seeds: Shared seed set
        config_path: Base experiment config
        output_dir: Output directory (fresh one under the run root when None)
        beam: Beam width at evaluation
        variants: Optional subset of variant names
        synthetic: Build a synthetic corpus of this many examples instead of reading sidecars
        corpus_seed: Seed of the synthetic corpus
        epochs: Override train.epochs
        device: Torch device
    """
    suite_variants(suite)
    config = load_config(config_path) if config_path is not None else ExperimentConfig()
    config = config.with_overrides({"train.epochs": epochs})

    if synthetic is not None:
        train_records, eval_records = synthetic_supervision(synthetic, config, corpus_seed)
        tagset: Tagset = COARSE
    else:
        if not config.data.train or not (config.data.test or config.data.validation):
            raise ConfigError("Ablation needs data.train and data.test (or data.validation), or --synthetic N")
        train = read_sidecar(Path(config.data.train))
        train_records = train.records
        eval_records = read_sidecar(Path(config.data.test or config.data.validation)).records
        tagset = train.header.tagset_obj

    output_dir = new_run_dir(f"ablate-{suite}", output_dir)
    manifest = RunManifest(
        command="ablate",
        config=config.model_dump(mode="json"),
        seed=seeds[0],
        arguments={
            "suite": suite, "seeds": seeds, "beam": beam, "variants": variants,
            "synthetic": synthetic, "corpus_seed": corpus_seed,
        },
    )
    if config_path is not None:
        manifest.add_input("config", config_path)
    if synthetic is None:
        manifest.add_input("train", Path(config.data.train))
        manifest.add_input("eval", Path(config.data.test or config.data.validation))

    table = run_suite(
        config, suite, seeds, train_records, eval_records, tagset, output_dir,
        beam=beam, device=device, variants=variants,
    )
    for name, path in table.paths.items():
        manifest.add_output(name, path)
    manifest.finish()
    manifest.write(output_dir)

    print_summary(table)
    for failure in table.failures:
        warning(f"Expected direction not met: {failure}")
    success(f"Ablation results written to {output_dir}")
    return table
