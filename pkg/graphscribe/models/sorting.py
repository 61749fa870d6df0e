"""
Learned triplet description order.

Each slot of a padded graph becomes a structure feature
``[e_h + e_r - e_t ; e_h ; e_r ; e_t]`` from hashed-bucket embeddings
(placeholder slots use a learned pad feature). A two-layer FC head reads the
features of all slots at once and scores every slot against every
description position. ``decode_order`` turns a score matrix into a valid
permutation.
"""

from __future__ import annotations

import hashlib
import logging
from typing import List, Sequence, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from scipy.optimize import linear_sum_assignment

from graphscribe.data.types import PAD_CLASS, OrderLabel, PaddedGraph

logger = logging.getLogger(__name__)

ScoreLike = Union[torch.Tensor, np.ndarray, Sequence[Sequence[float]]]


def bucket_of(surface: str, n_buckets: int) -> int:
    """Stable hash bucket of a surface string (case-insensitive)."""
    digest = hashlib.blake2b(surface.lower().encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % n_buckets


def hash_graph(pg: PaddedGraph, n_buckets: int) -> torch.Tensor:
    """(N, 3) bucket ids for head, relation and tail of every slot."""
    return torch.tensor(
        [[bucket_of(part, n_buckets) for part in triplet.as_tuple()] for triplet in pg.triplets],
        dtype=torch.long,
    )


class TripletEncoder(nn.Module):
    """Structure features per slot from learned entity and relation embeddings."""

    def __init__(self, n_buckets: int, embed_dim: int):
        super().__init__()
        self.n_buckets = n_buckets
        self.entity = nn.Embedding(n_buckets, embed_dim)
        self.relation = nn.Embedding(n_buckets, embed_dim)
        self.pad_feature = nn.Parameter(torch.randn(4 * embed_dim) * 0.02)

    @property
    def feature_dim(self) -> int:
        return self.pad_feature.shape[0]

    def forward(self, buckets: torch.Tensor, slot_mask: torch.Tensor) -> torch.Tensor:
        """
        Args:
            buckets: (B, N, 3) bucket ids
            slot_mask: (B, N) True for real triplets

        Returns:
            (B, N, 4 * embed_dim) slot features
        """
        head = self.entity(buckets[..., 0])
        relation = self.relation(buckets[..., 1])
        tail = self.entity(buckets[..., 2])
        features = torch.cat([head + relation - tail, head, relation, tail], dim=-1)
        pad = self.pad_feature.expand_as(features)
        return torch.where(slot_mask.unsqueeze(-1), features, pad)


class SortingNetwork(nn.Module):
    """FC_s over the concatenated features of all N slots -> N x N log-probabilities."""

    def __init__(self, n_slots: int, feature_dim: int, hidden: int):
        super().__init__()
        self.n_slots = n_slots
        self.fc1 = nn.Linear(n_slots * feature_dim, hidden)
        self.fc2 = nn.Linear(hidden, n_slots * n_slots)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        batch = features.shape[0]
        logits = self.fc2(F.relu(self.fc1(features.reshape(batch, -1))))
        return F.log_softmax(logits.view(batch, self.n_slots, self.n_slots), dim=-1)


class NodeSortingNetwork(nn.Module):
    """
    Node-level baseline: heads and tails are classified into positions
    independently; a triplet's position is the mean expected position of its
    two nodes.
    """

    def __init__(self, n_slots: int, n_buckets: int, embed_dim: int, hidden: int):
        super().__init__()
        self.n_slots = n_slots
        self.entity = nn.Embedding(n_buckets, embed_dim)
        self.role = nn.Embedding(2, embed_dim)
        self.pad_feature = nn.Parameter(torch.randn(embed_dim) * 0.02)
        self.fc1 = nn.Linear(2 * n_slots * embed_dim, hidden)
        self.fc2 = nn.Linear(hidden, 2 * n_slots * n_slots)

    def forward(self, buckets: torch.Tensor, slot_mask: torch.Tensor) -> torch.Tensor:
        """(B, N, 3) buckets -> (B, 2N, N) log-probabilities; node 2i is the head of slot i, 2i+1 its tail."""
        batch = buckets.shape[0]
        heads = self.entity(buckets[..., 0]) + self.role.weight[0]
        tails = self.entity(buckets[..., 2]) + self.role.weight[1]
        nodes = torch.stack([heads, tails], dim=2)
        mask = slot_mask[..., None, None]
        nodes = torch.where(mask, nodes, self.pad_feature.expand_as(nodes))
        logits = self.fc2(F.relu(self.fc1(nodes.reshape(batch, -1))))
        return F.log_softmax(logits.view(batch, 2 * self.n_slots, self.n_slots), dim=-1)


def node_targets(ranks: torch.Tensor) -> torch.Tensor:
    """Both nodes of a triplet are supervised with the triplet's rank."""
    return ranks.repeat_interleave(2, dim=-1)


def node_order(node_log_probs: ScoreLike, n_real: int) -> OrderLabel:
    """Order triplets by the mean expected position of their head and tail."""
    probs = _as_numpy(node_log_probs)
    n_slots = probs.shape[1]
    positions = np.exp(probs) @ np.arange(n_slots, dtype=np.float64)
    per_triplet = positions[: 2 * n_real].reshape(n_real, 2).mean(axis=1)
    listing = sorted(range(n_real), key=lambda slot: (per_triplet[slot], slot))
    return OrderLabel.from_listing(listing, n_slots)


def decode_order(scores: ScoreLike, n_real: int, method: str = "greedy") -> OrderLabel:
    """
    Turn an N x N score matrix into a permutation over the real slots.

    Row-wise argmax on the real submatrix is kept when it is already a
    permutation. Otherwise the greedy repair commits the highest remaining
    entry whose row and column are both free, ties going to the lower row and
    then the lower column. ``method="optimal"`` solves the assignment exactly
    instead.
    """
    matrix = _as_numpy(scores)
    n_slots = matrix.shape[0]
    if not 0 < n_real <= n_slots:
        raise ValueError(f"n_real must be in 1..{n_slots}, got {n_real}")
    sub = matrix[:n_real, :n_real]

    if method == "optimal":
        rows, cols = linear_sum_assignment(sub, maximize=True)
        ranks = [0] * n_real
        for row, col in zip(rows, cols):
            ranks[row] = int(col)
    elif method == "greedy":
        ranks = [int(c) for c in sub.argmax(axis=1)]
        if len(set(ranks)) != n_real:
            logger.debug(f"Row argmax {ranks} is not a permutation, repairing")
            ranks = _greedy_assignment(sub)
    else:
        raise ValueError(f"Unknown assignment method '{method}'")

    return OrderLabel(tuple(ranks) + (PAD_CLASS,) * (n_slots - n_real))


def _greedy_assignment(sub: np.ndarray) -> List[int]:
    n = sub.shape[0]
    entries = sorted(
        ((sub[row, col], row, col) for row in range(n) for col in range(n)),
        key=lambda entry: (-entry[0], entry[1], entry[2]),
    )
    ranks = [-1] * n
    used_cols = set()
    for _, row, col in entries:
        if ranks[row] == -1 and col not in used_cols:
            ranks[row] = col
            used_cols.add(col)
    return ranks


def sort_loss(log_probs: torch.Tensor, gold_ranks: torch.Tensor, reduction: str = "mean") -> torch.Tensor:
    """
    Cross-entropy between slot scores and gold ranks, summed over real slots.

    Args:
        log_probs: (B, N, N) row-normalized log-probabilities
        gold_ranks: (B, N) ranks, PAD_CLASS for placeholder slots
    """
    batch, n_rows, n_slots = log_probs.shape
    per_slot = F.nll_loss(
        log_probs.reshape(-1, n_slots),
        gold_ranks.reshape(-1),
        ignore_index=PAD_CLASS,
        reduction="none",
    ).view(batch, n_rows)
    per_example = per_slot.sum(dim=1)
    if reduction == "mean":
        return per_example.mean()
    if reduction == "sum":
        return per_example.sum()
    if reduction == "none":
        return per_example
    raise ValueError(f"Unknown reduction '{reduction}'")


def exact_match(predicted: OrderLabel, gold: OrderLabel) -> bool:
    return predicted.listing() == gold.listing()


def _as_numpy(scores: ScoreLike) -> np.ndarray:
    if isinstance(scores, torch.Tensor):
        return scores.detach().cpu().double().numpy()
    return np.asarray(scores, dtype=np.float64)
