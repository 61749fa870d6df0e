"""
Train Command - Train a model from supervision sidecars
"""

import time
from pathlib import Path
from typing import Any, Dict, Optional

from graphscribe.cli.manifest import RunManifest
from graphscribe.cli.utils import format_duration, info, new_run_dir, print_mapping, success
from graphscribe.errors import ConfigError
from graphscribe.supervision.sidecar import read_sidecar
from graphscribe.training.batching import build_record_vocab
from graphscribe.training.config import ExperimentConfig, load_config
from graphscribe.training.trainer import CHECKPOINT_FILE, METRICS_LOG, TRAIN_LOG, Trainer, TrainResult


def resolve_config(config_path: Optional[Path], overrides: Dict[str, Any]) -> ExperimentConfig:
    config = load_config(config_path) if config_path is not None else ExperimentConfig()
    return config.with_overrides(overrides)


def check_slots(n_slots: int, config: ExperimentConfig, source: str):
    """Sidecars must be built with the slot count the model sorts over."""
    if n_slots != config.model.n_slots:
        raise ConfigError(
            f"Sidecar {source} was built with {n_slots} slots but model.n_slots is {config.model.n_slots}; "
            f"rerun preprocess with --n-slots {config.model.n_slots} or change the config"
        )


def train_model(
    config_path: Optional[Path],
    overrides: Dict[str, Any],
    run_dir: Optional[Path] = None,
    device: str = "cpu",
    show_progress: bool = True,
) -> TrainResult:
    """
    Train and write logs, config snapshot, vocabulary, checkpoint and manifest.

    Args:
        config_path: YAML experiment config (defaults when None)
        overrides: Dotted config overrides from flags
        run_dir: Run directory (a fresh one under the run root when None)
        device: Torch device
        show_progress: Show a progress bar
    """
    config = resolve_config(config_path, overrides)
    if not config.data.train:
        raise ConfigError("No training data: set data.train in the config or pass --train")

    train = read_sidecar(Path(config.data.train))
    check_slots(train.header.n_slots, config, config.data.train)
    validation = None
    if config.data.validation:
        sidecar = read_sidecar(Path(config.data.validation))
        check_slots(sidecar.header.n_slots, config, config.data.validation)
        validation = sidecar.records
    tagset = train.header.tagset_obj
    vocab = build_record_vocab(train.records, config.data.min_count, config.data.max_size)
    info(f"Vocabulary: {len(vocab)} tokens; tagset '{tagset.name}' with {len(tagset)} tags")

    run_dir = new_run_dir("train", run_dir)
    manifest = RunManifest(
        command="train",
        config=config.model_dump(mode="json"),
        seed=config.train.seed,
        arguments={"device": device, "overrides": {k: v for k, v in overrides.items() if v is not None}},
    )
    if config_path is not None:
        manifest.add_input("config", config_path)
    manifest.add_input("train", Path(config.data.train))
    if config.data.validation:
        manifest.add_input("validation", Path(config.data.validation))

    vocab.save(run_dir / "vocab.json")
    started = time.perf_counter()
    trainer = Trainer(config, vocab, tagset, run_dir, device=device)
    try:
        result = trainer.fit(train.records, validation, show_progress=show_progress)
    finally:
        manifest.finish()
        for name in (TRAIN_LOG, METRICS_LOG, CHECKPOINT_FILE, "config.yaml", "vocab.json"):
            if (run_dir / name).exists():
                manifest.add_output(name, run_dir / name)
        manifest.write(run_dir)

    last = result.history[-1]
    print_mapping("Final epoch", {k: v for k, v in last.to_dict().items() if v is not None}, ("Metric", "Value"))
    success(f"Checkpoint saved to {result.checkpoint} in {format_duration(time.perf_counter() - started)}")
    return result
