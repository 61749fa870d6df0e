"""
Experiment configuration: data, model and training sections in one YAML file.

Example::

    data:
      train: data/train.sup.jsonl
      validation: data/dev.sup.jsonl
      n_slots: 8
    model:
      d_model: 128
    train:
      epochs: 50
      lambda_pos: 0.7
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from graphscribe.errors import ConfigError
from graphscribe.models.config import AblationFlags, ModelConfig

logger = logging.getLogger(__name__)


class DataConfig(BaseModel):
    """Supervision sidecars and preprocessing choices."""
    train: Optional[str] = None
    validation: Optional[str] = None
    test: Optional[str] = None
    n_slots: int = 8
    oversize: str = "reject"
    tagger: str = "lexicon"
    min_count: int = 1
    max_size: Optional[int] = None

    @field_validator("oversize")
    @classmethod
    def oversize_policy(cls, value: str) -> str:
        if value not in ("reject", "truncate"):
            raise ValueError("oversize must be 'reject' or 'truncate'")
        return value


class TrainConfig(BaseModel):
    """Optimisation settings, loss weights and ablation switches."""
    lambda_pos: float = Field(0.7, ge=0.0)
    lambda_sort: float = Field(0.4, ge=0.0)
    lambda_copy: float = Field(0.3, ge=0.0)
    learning_rate: float = Field(3e-4, gt=0.0)
    weight_decay: float = Field(0.01, ge=0.0)
    batch_size: int = Field(16, gt=0)
    epochs: int = Field(30, gt=0)
    seed: int = 13
    grad_clip: float = Field(1.0, gt=0.0)
    warmup_fraction: float = Field(0.05, ge=0.0, le=1.0)
    reduction: str = "mean"
    beam_size: int = Field(5, gt=0)
    validate_every: int = Field(1, gt=0)
    ablation: AblationFlags = Field(default_factory=AblationFlags)

    @field_validator("reduction")
    @classmethod
    def reduction_mode(cls, value: str) -> str:
        if value not in ("mean", "sum"):
            raise ValueError("reduction must be 'mean' or 'sum'")
        return value


class ExperimentConfig(BaseModel):
    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)

    @model_validator(mode="after")
    def matching_slots(self) -> "ExperimentConfig":
        if self.data.n_slots != self.model.n_slots:
            raise ValueError(
                f"data.n_slots ({self.data.n_slots}) and model.n_slots ({self.model.n_slots}) must match"
            )
        return self

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """
        Apply dotted overrides such as ``{"train.epochs": 5}``; None values are skipped.
        """
        data = self.model_dump(mode="json")
        for dotted, value in overrides.items():
            if value is None:
                continue
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                if key not in node or not isinstance(node[key], dict):
                    raise ConfigError(f"Unknown configuration key '{dotted}'")
                node = node[key]
            if leaf not in node:
                raise ConfigError(f"Unknown configuration key '{dotted}'")
            node[leaf] = value
        return parse_config(data)


def parse_config(data: Optional[Dict[str, Any]]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**(data or {}))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def load_config(path: Path) -> ExperimentConfig:
    """Load an experiment config from YAML."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping")
    return parse_config(data)


def dump_config(config: ExperimentConfig, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
