"""
Turning supervision records into padded tensor batches.

Target sequences: decoder input ``<bos> y_1 .. y_n``, output ``y_1 .. y_n <eos>``.
The ``<eos>`` step has copy label 0 and POS tag ``<eos>``; the POS decoder
is fed ``<bos> t_1 .. t_n`` in lockstep with the word decoder.
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence

import numpy as np
import torch
from torch.utils.data import Dataset

from graphscribe.data.graph import linearize, linearized_tokens, pad_graph
from graphscribe.data.types import PAD_PROVENANCE, LinearizedKG, OrderLabel
from graphscribe.errors import DataError
from graphscribe.models.config import ModelConfig, OrderMode
from graphscribe.models.ordering import random_order
from graphscribe.models.sorting import hash_graph
from graphscribe.supervision.sidecar import SupervisionRecord
from graphscribe.supervision.tagging import Tagset
from graphscribe.supervision.vocab import Vocabulary, build_vocab

logger = logging.getLogger(__name__)


def build_record_vocab(
    records: Sequence[SupervisionRecord], min_count: int = 1, max_size: Optional[int] = None
) -> Vocabulary:
    """Vocabulary over the reference tokens and the graph tokens of a split."""
    return build_vocab(
        (list(record.tokens) + linearized_tokens(record.graph) for record in records),
        min_count=min_count,
        max_size=max_size,
    )


@dataclass
class PreparedExample:
    id: str
    src_ids: List[int]
    provenance: List[int]
    tgt_in: List[int]
    tgt_out: List[int]
    tag_in: List[int]
    tag_out: List[int]
    copy_labels: List[int]
    buckets: torch.Tensor
    slot_mask: List[bool]
    ranks: List[int]
    linearized: LinearizedKG
    record: SupervisionRecord


@dataclass
class Batch:
    src_ids: torch.Tensor
    src_mask: torch.Tensor
    provenance: torch.Tensor
    tgt_in: torch.Tensor
    tgt_out: torch.Tensor
    tgt_mask: torch.Tensor
    tag_in: torch.Tensor
    tag_out: torch.Tensor
    copy_labels: torch.Tensor
    buckets: torch.Tensor
    slot_mask: torch.Tensor
    ranks: torch.Tensor
    ids: List[str]

    def __len__(self) -> int:
        return len(self.ids)

    def to(self, device: torch.device | str) -> "Batch":
        moved = {}
        for f in fields(self):
            value = getattr(self, f.name)
            moved[f.name] = value.to(device) if isinstance(value, torch.Tensor) else value
        return Batch(**moved)

    def model_inputs(self) -> dict:
        return {
            "src_ids": self.src_ids,
            "src_mask": self.src_mask,
            "tgt_in": self.tgt_in,
            "tag_in": self.tag_in,
            "tag_out": self.tag_out,
            "tgt_mask": self.tgt_mask,
            "buckets": self.buckets,
            "slot_mask": self.slot_mask,
        }

    def describe(self) -> dict:
        """JSON-friendly dump used for diagnostics."""
        return {
            f.name: (getattr(self, f.name).tolist() if isinstance(getattr(self, f.name), torch.Tensor) else getattr(self, f.name))
            for f in fields(self)
        }


def training_order(record: SupervisionRecord, mode: OrderMode, n_slots: int, seed: int = 0) -> OrderLabel:
    """
    Order used to linearize a training example: the gold order, except under
    the random and input modes where the generator is trained the way it
    will be evaluated.
    """
    gold = record.order_label.resized(n_slots)
    if mode == OrderMode.RANDOM:
        rng = np.random.default_rng([seed, zlib.crc32(record.id.encode("utf-8"))])
        return random_order(record.graph, n_slots, rng)
    if mode == OrderMode.INPUT:
        return OrderLabel.identity(len(record.triples), n_slots)
    return gold


def prepare_example(
    record: SupervisionRecord,
    vocab: Vocabulary,
    tagset: Tagset,
    config: ModelConfig,
    order: Optional[OrderLabel] = None,
) -> PreparedExample:
    kg = record.graph
    pg = pad_graph(kg, config.n_slots)
    gold = record.order_label.resized(config.n_slots)
    lin = linearize(kg, order or gold, vocab)

    src_ids = list(lin.ids)
    provenance = list(lin.provenance)
    if len(src_ids) > config.max_source_len:
        if config.overlong == "error":
            raise DataError(
                f"Example '{record.id}' linearizes to {len(src_ids)} tokens, more than {config.max_source_len}"
            )
        logger.warning(f"Truncating source of '{record.id}' to {config.max_source_len} tokens")
        src_ids = src_ids[: config.max_source_len]
        provenance = provenance[: config.max_source_len]

    keep = config.max_target_len - 1
    words = vocab.encode(record.tokens[:keep])
    tags = list(record.pos[:keep])
    labels = list(record.copy_labels[:keep])
    if len(tags) != len(words) or len(labels) != len(words):
        raise DataError(f"Supervision for '{record.id}' is misaligned with its tokens")

    return PreparedExample(
        id=record.id,
        src_ids=src_ids,
        provenance=provenance,
        tgt_in=[vocab.bos_id] + words,
        tgt_out=words + [vocab.eos_id],
        tag_in=[tagset.bos_id] + tags,
        tag_out=tags + [tagset.eos_id],
        copy_labels=labels + [0],
        buckets=hash_graph(pg, config.hash_buckets),
        slot_mask=list(pg.mask),
        ranks=list(gold.ranks),
        linearized=lin,
        record=record,
    )


class SupervisionDataset(Dataset):
    """Prepared examples for a split, linearized under the training order mode."""

    def __init__(
        self,
        records: Sequence[SupervisionRecord],
        vocab: Vocabulary,
        tagset: Tagset,
        config: ModelConfig,
        order_mode: OrderMode = OrderMode.LEARNED,
        seed: int = 0,
    ):
        self.examples = [
            prepare_example(
                record, vocab, tagset, config,
                order=training_order(record, order_mode, config.n_slots, seed),
            )
            for record in records
        ]

    def __len__(self) -> int:
        return len(self.examples)

    def __getitem__(self, index: int) -> PreparedExample:
        return self.examples[index]


class Collator:
    """Pads a list of prepared examples into a Batch."""

    def __init__(self, pad_id: int, tag_pad_id: int):
        self.pad_id = pad_id
        self.tag_pad_id = tag_pad_id

    def __call__(self, examples: Sequence[PreparedExample]) -> Batch:
        src_len = max(len(e.src_ids) for e in examples)
        tgt_len = max(len(e.tgt_in) for e in examples)

        def pad(rows, length, value):
            return torch.tensor([row + [value] * (length - len(row)) for row in rows], dtype=torch.long)

        src_ids = pad([e.src_ids for e in examples], src_len, self.pad_id)
        tgt_out = pad([e.tgt_out for e in examples], tgt_len, self.pad_id)
        return Batch(
            src_ids=src_ids,
            src_mask=pad([[1] * len(e.src_ids) for e in examples], src_len, 0).bool(),
            provenance=pad([e.provenance for e in examples], src_len, PAD_PROVENANCE),
            tgt_in=pad([e.tgt_in for e in examples], tgt_len, self.pad_id),
            tgt_out=tgt_out,
            tgt_mask=pad([[1] * len(e.tgt_out) for e in examples], tgt_len, 0).bool(),
            tag_in=pad([e.tag_in for e in examples], tgt_len, self.tag_pad_id),
            tag_out=pad([e.tag_out for e in examples], tgt_len, self.tag_pad_id),
            copy_labels=pad([e.copy_labels for e in examples], tgt_len, 0).float(),
            buckets=torch.stack([e.buckets for e in examples]),
            slot_mask=torch.tensor([e.slot_mask for e in examples], dtype=torch.bool),
            ranks=torch.tensor([e.ranks for e in examples], dtype=torch.long),
            ids=[e.id for e in examples],
        )
