"""
Training loop for the joint objective.

Every optimisation step appends a line to ``train_log.jsonl`` and every
epoch a line to ``metrics.jsonl`` in the run directory. A non-finite loss
stops training after dumping the offending batch.
"""

from __future__ import annotations

import json
import logging
import math
import random
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import torch
from rich.progress import Progress
from torch.utils.data import DataLoader

from graphscribe.data.types import OrderLabel
from graphscribe.errors import DataError, NumericError
from graphscribe.evaluation.decoding import generate
from graphscribe.evaluation.metrics import bleu4, order_metrics
from graphscribe.models.config import OrderMode
from graphscribe.models.copy_gate import copy_loss
from graphscribe.models.model import GraphToTextModel
from graphscribe.models.seq2seq import pos_loss, token_loss
from graphscribe.models.sorting import decode_order, node_order, node_targets, sort_loss
from graphscribe.supervision.sidecar import SupervisionRecord
from graphscribe.supervision.tagging import Tagset
from graphscribe.supervision.vocab import Vocabulary
from graphscribe.training.batching import Batch, Collator, SupervisionDataset
from graphscribe.training.checkpoint import build_model, save_checkpoint
from graphscribe.training.config import ExperimentConfig, dump_config
from graphscribe.training.losses import LossBundle, total_loss

logger = logging.getLogger(__name__)

TRAIN_LOG = "train_log.jsonl"
METRICS_LOG = "metrics.jsonl"
CHECKPOINT_FILE = "checkpoint.pt"
CONFIG_FILE = "config.yaml"


@dataclass
class EpochMetrics:
    epoch: int
    l_token: float
    l_pos: float
    l_sort: float
    l_copy: float
    l_total: float
    order_accuracy: float
    lr: float
    val_bleu4: Optional[float] = None
    val_order_accuracy: Optional[float] = None

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass
class TrainResult:
    run_dir: Path
    checkpoint: Path
    history: List[EpochMetrics] = field(default_factory=list)


def seed_everything(seed: int):
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def warmup_schedule(total_steps: int, warmup_fraction: float) -> Callable[[int], float]:
    """Linear warmup over the first ``warmup_fraction`` of steps, then constant."""
    warmup = int(math.ceil(total_steps * warmup_fraction))

    def factor(step: int) -> float:
        if warmup == 0:
            return 1.0
        return min(1.0, (step + 1) / warmup)

    return factor


class Trainer:
    """
    Trains a GraphToTextModel on supervision records.

    Args:
        config: Experiment configuration
        vocab: Vocabulary built from the training split
        tagset: POS tagset of the supervision
        run_dir: Directory receiving logs, config snapshot and checkpoint
        device: Torch device string
        model: Optional pre-built model (built from the config otherwise)
    """

    def __init__(
        self,
        config: ExperimentConfig,
        vocab: Vocabulary,
        tagset: Tagset,
        run_dir: Path,
        device: str = "cpu",
        model: Optional[GraphToTextModel] = None,
    ):
        self.config = config
        self.vocab = vocab
        self.tagset = tagset
        self.run_dir = Path(run_dir)
        self.device = device

        seed_everything(config.train.seed)
        self.model = (model if model is not None else build_model(config, vocab, tagset)).to(device)
        self.optimizer = torch.optim.AdamW(
            self.model.parameters(),
            lr=config.train.learning_rate,
            weight_decay=config.train.weight_decay,
        )
        self.order_mode = config.train.ablation.order_mode
        self.weights = (config.train.lambda_pos, config.train.lambda_sort, config.train.lambda_copy)
        self.collator = Collator(vocab.pad_id, tagset.pad_id)
        self.global_step = 0
        self._last_sort_scores: Optional[torch.Tensor] = None

    @property
    def model_config(self):
        return self.model.config

    def loader(self, records: Sequence[SupervisionRecord], shuffle: bool = True) -> DataLoader:
        dataset = SupervisionDataset(
            records, self.vocab, self.tagset, self.model_config,
            order_mode=self.order_mode, seed=self.config.train.seed,
        )
        generator = torch.Generator().manual_seed(self.config.train.seed)
        return DataLoader(
            dataset,
            batch_size=self.config.train.batch_size,
            shuffle=shuffle,
            collate_fn=self.collator,
            generator=generator,
            num_workers=0,
        )

    def compute_losses(self, batch: Batch) -> LossBundle:
        """Forward pass and the four component losses for one batch."""
        reduction = self.config.train.reduction
        out = self.model(**batch.model_inputs())

        l_token = token_loss(out.word_logits, batch.tgt_out, self.vocab.pad_id, reduction)
        l_pos = pos_loss(out.pos_logits, batch.tag_out, self.tagset.pad_id, reduction)
        if self.order_mode == OrderMode.NODE_LEVEL:
            l_sort = sort_loss(out.node_log_probs, node_targets(batch.ranks), reduction)
        else:
            l_sort = sort_loss(out.sort_log_probs, batch.ranks, reduction)
        l_copy = None
        if out.gate is not None:
            l_copy = copy_loss(out.gate.p_copy, batch.copy_labels, batch.tgt_mask, reduction=reduction)

        self._last_sort_scores = out.node_log_probs if self.order_mode == OrderMode.NODE_LEVEL else out.sort_log_probs
        return total_loss(l_token, l_pos, l_sort, l_copy, self.weights, self.config.train.ablation)

    def train_step(self, batch: Batch, epoch: int, scheduler=None) -> LossBundle:
        self.model.train()
        batch = batch.to(self.device)
        self.optimizer.zero_grad(set_to_none=True)
        bundle = self.compute_losses(batch)
        if not bundle.is_finite():
            self._abort(batch, bundle, epoch)

        bundle.l_total.backward()
        torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.config.train.grad_clip)
        self.optimizer.step()
        if scheduler is not None:
            scheduler.step()
        self.global_step += 1
        return bundle

    def _abort(self, batch: Batch, bundle: LossBundle, epoch: int):
        self.run_dir.mkdir(parents=True, exist_ok=True)
        dump = self.run_dir / f"nonfinite_step{self.global_step}.json"
        with open(dump, "w") as f:
            json.dump(
                {"step": self.global_step, "epoch": epoch, "losses": bundle.to_dict(), "batch": batch.describe()},
                f,
                indent=2,
            )
        logger.error(f"Non-finite loss at step {self.global_step}; batch dumped to {dump}")
        raise NumericError(f"Non-finite loss at step {self.global_step} (epoch {epoch})", dump_path=dump)

    def _batch_order_hits(self, batch: Batch) -> List[bool]:
        scores = self._last_sort_scores.detach().cpu()
        hits = []
        for b in range(len(batch)):
            n_real = int(batch.slot_mask[b].sum())
            gold = OrderLabel(tuple(batch.ranks[b].tolist()))
            if self.order_mode == OrderMode.NODE_LEVEL:
                predicted = node_order(scores[b], n_real)
            else:
                predicted = decode_order(scores[b], n_real, self.model_config.assignment)
            hits.append(predicted.listing() == gold.listing())
        return hits

    def validate(self, records: Sequence[SupervisionRecord]) -> Dict[str, float]:
        """Greedy decoding under the training order mode: BLEU-4 and order accuracy."""
        hypotheses, references, predicted, gold = [], [], [], []
        n_slots = self.model_config.n_slots
        for record in records:
            rng = np.random.default_rng([self.config.train.seed, zlib.crc32(record.id.encode("utf-8"))])
            reference_order = record.order_label.resized(n_slots)
            generation = generate(
                self.model, record.graph, self.vocab,
                order_mode=self.order_mode, beam=1, gold=reference_order, rng=rng,
            )
            hypotheses.append(generation.text)
            references.append(record.text)
            predicted.append(generation.order)
            gold.append(reference_order)
        return {
            "bleu4": bleu4(hypotheses, references),
            "order_accuracy": order_metrics(predicted, gold).exact_match,
        }

    def fit(
        self,
        train_records: Sequence[SupervisionRecord],
        validation_records: Optional[Sequence[SupervisionRecord]] = None,
        show_progress: bool = False,
    ) -> TrainResult:
        """
        Train for the configured number of epochs and save the final checkpoint.

        Returns:
            TrainResult with the per-epoch history and checkpoint path
        """
        if not train_records:
            raise DataError("Training split is empty")
        self.run_dir.mkdir(parents=True, exist_ok=True)
        dump_config(self.config, self.run_dir / CONFIG_FILE)

        loader = self.loader(train_records)
        epochs = self.config.train.epochs
        scheduler = torch.optim.lr_scheduler.LambdaLR(
            self.optimizer, warmup_schedule(epochs * len(loader), self.config.train.warmup_fraction)
        )
        logger.info(
            f"Training on {len(train_records)} examples for {epochs} epochs "
            f"({len(loader)} batches per epoch, {self.config.train.ablation.describe()})"
        )

        history: List[EpochMetrics] = []
        with open(self.run_dir / TRAIN_LOG, "w") as step_log, open(self.run_dir / METRICS_LOG, "w") as epoch_log, \
                Progress(disable=not show_progress) as progress:
            task = progress.add_task("[cyan]Training...", total=epochs)
            for epoch in range(1, epochs + 1):
                sums = {"l_token": 0.0, "l_pos": 0.0, "l_sort": 0.0, "l_copy": 0.0, "l_total": 0.0}
                hits: List[bool] = []
                for batch in loader:
                    bundle = self.train_step(batch, epoch, scheduler)
                    values = bundle.to_dict()
                    lr = scheduler.get_last_lr()[0]
                    step_log.write(json.dumps({"step": self.global_step, "epoch": epoch, "lr": lr, **values}) + "\n")
                    for key in sums:
                        sums[key] += values[key]
                    hits.extend(self._batch_order_hits(batch))

                n_batches = max(1, len(loader))
                metrics = EpochMetrics(
                    epoch=epoch,
                    **{key: value / n_batches for key, value in sums.items()},
                    order_accuracy=100.0 * float(np.mean(hits)) if hits else 0.0,
                    lr=scheduler.get_last_lr()[0],
                )
                if validation_records and epoch % self.config.train.validate_every == 0:
                    scores = self.validate(validation_records)
                    metrics.val_bleu4 = scores["bleu4"]
                    metrics.val_order_accuracy = scores["order_accuracy"]

                epoch_log.write(json.dumps(metrics.to_dict()) + "\n")
                epoch_log.flush()
                history.append(metrics)
                logger.info(
                    f"epoch {epoch}: l_total={metrics.l_total:.4f} l_token={metrics.l_token:.4f} "
                    f"order_acc={metrics.order_accuracy:.1f}"
                    + (f" val_bleu4={metrics.val_bleu4:.2f}" if metrics.val_bleu4 is not None else "")
                )
                progress.update(task, advance=1)

        checkpoint = save_checkpoint(
            self.run_dir / CHECKPOINT_FILE,
            self.model,
            self.config,
            self.vocab,
            self.tagset,
            extra={"epochs": epochs, "steps": self.global_step, "history": [m.to_dict() for m in history]},
        )
        return TrainResult(run_dir=self.run_dir, checkpoint=checkpoint, history=history)


def read_log(path: Path) -> List[Dict[str, float]]:
    """Rows of a JSON-lines training or epoch log."""
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
