"""
Checkpoint files: model parameters together with the experiment config, the
vocabulary and the tagset, so a checkpoint alone is enough to generate.

Layout of a run directory::

    <run>/
      manifest.json       run manifest
      config.yaml         resolved experiment config
      checkpoint.pt       this file
      train_log.jsonl     one line per optimisation step
      metrics.jsonl       one line per epoch
"""

from __future__ import annotations

import hashlib
import logging
import os
import pickle
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import torch

from graphscribe.errors import CheckpointError
from graphscribe.models.model import GraphToTextModel
from graphscribe.supervision.tagging import Tagset
from graphscribe.supervision.vocab import Vocabulary
from graphscribe.training.config import ExperimentConfig, parse_config

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "graphscribe-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class LoadedCheckpoint:
    model: GraphToTextModel
    config: ExperimentConfig
    vocab: Vocabulary
    tagset: Tagset
    extra: Dict[str, Any]


def state_digest(state: Dict[str, torch.Tensor]) -> str:
    """sha256 over parameter names and raw tensor bytes."""
    hasher = hashlib.sha256()
    for name in sorted(state):
        tensor = state[name].detach().cpu().contiguous()
        hasher.update(name.encode("utf-8"))
        hasher.update(str(tensor.dtype).encode("utf-8"))
        hasher.update(str(tuple(tensor.shape)).encode("utf-8"))
        hasher.update(tensor.view(-1).view(torch.uint8).numpy().tobytes() if tensor.numel() else b"")
    return hasher.hexdigest()


def build_model(config: ExperimentConfig, vocab: Vocabulary, tagset: Tagset) -> GraphToTextModel:
    """Instantiate a model sized for ``vocab`` and ``tagset``."""
    model_config = config.model.model_copy(
        update={"vocab_size": len(vocab), "tagset_size": len(tagset), "tagset": tagset.name}
    )
    return GraphToTextModel(
        model_config,
        ablation=config.train.ablation,
        pad_id=vocab.pad_id,
        tag_pad_id=tagset.pad_id,
        tag_bos_id=tagset.bos_id,
        tag_eos_id=tagset.eos_id,
    )


def save_checkpoint(
    path: Path,
    model: GraphToTextModel,
    config: ExperimentConfig,
    vocab: Vocabulary,
    tagset: Tagset,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write a checkpoint atomically (temporary file, then rename).

    Args:
        path: Destination file
        model: Model whose parameters are saved
        config: Experiment config the model was built from
        vocab: Vocabulary
        tagset: Tagset
        extra: JSON-like metadata (epoch, metrics)

    Returns:
        The checkpoint path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state = {name: tensor.detach().cpu().clone() for name, tensor in model.state_dict().items()}
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": config.model_dump(mode="json"),
        "vocab": vocab.tokens(),
        "tagset": tagset.to_dict(),
        "state_dict": state,
        "digest": state_digest(state),
        "extra": extra or {},
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Path, device: str = "cpu") -> LoadedCheckpoint:
    """
    Load and verify a checkpoint.

    Raises:
        CheckpointError: Missing, truncated or tampered file, wrong format or version
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (RuntimeError, EOFError, OSError, pickle.UnpicklingError, ValueError) as e:
        raise CheckpointError(f"Checkpoint {path} is unreadable or truncated: {e}") from e

    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a graphscribe checkpoint")
    version = payload.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Checkpoint {path} has version {version}; this release reads version {CHECKPOINT_VERSION}"
        )

    state = payload["state_dict"]
    if state_digest(state) != payload.get("digest"):
        raise CheckpointError(f"Checkpoint {path} failed its integrity check")

    config = parse_config(payload["config"])
    vocab = Vocabulary(payload["vocab"])
    tagset = Tagset.from_dict(payload["tagset"])
    model = build_model(config, vocab, tagset)
    try:
        model.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"Checkpoint {path} does not match its own config: {e}") from e
    model.to(device)
    model.eval()
    logger.info(f"Loaded checkpoint {path} ({len(vocab)} tokens, {len(tagset)} tags)")
    return LoadedCheckpoint(model=model, config=config, vocab=vocab, tagset=tagset, extra=payload.get("extra", {}))
