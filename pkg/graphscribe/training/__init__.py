"""
Training: experiment config, batching, the joint objective, the training
loop and checkpoints.
"""

from graphscribe.training.batching import (
    Batch,
    Collator,
    PreparedExample,
    SupervisionDataset,
    build_record_vocab,
    prepare_example,
)
from graphscribe.training.checkpoint import LoadedCheckpoint, build_model, load_checkpoint, save_checkpoint
from graphscribe.training.config import (
    DataConfig,
    ExperimentConfig,
    TrainConfig,
    dump_config,
    load_config,
    parse_config,
)
from graphscribe.training.losses import DEFAULT_WEIGHTS, LossBundle, total_loss
from graphscribe.training.trainer import EpochMetrics, Trainer, TrainResult, read_log, seed_everything

__all__ = [
    "Batch",
    "Collator",
    "PreparedExample",
    "SupervisionDataset",
    "build_record_vocab",
    "prepare_example",
    "LoadedCheckpoint",
    "build_model",
    "load_checkpoint",
    "save_checkpoint",
    "DataConfig",
    "ExperimentConfig",
    "TrainConfig",
    "dump_config",
    "load_config",
    "parse_config",
    "DEFAULT_WEIGHTS",
    "LossBundle",
    "total_loss",
    "EpochMetrics",
    "Trainer",
    "TrainResult",
    "read_log",
    "seed_everything",
]
