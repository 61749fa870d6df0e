"""
Word encoder-decoder and POS generator pieces, plus their losses.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from graphscribe.models.config import ModelConfig
from graphscribe.models.layers import DecoderCache, TransformerDecoder, TransformerEncoder


class SourceEncoder(nn.Module):
    """Transformer encoder over a linearized graph."""

    def __init__(self, config: ModelConfig, embedding: nn.Embedding, n_layers: Optional[int] = None):
        super().__init__()
        self.embedding = embedding
        self.scale = math.sqrt(config.d_model)
        self.dropout = nn.Dropout(config.dropout)
        self.encoder = TransformerEncoder(
            config.d_model,
            n_layers or config.n_layers,
            config.n_heads,
            config.d_ff,
            config.dropout,
            config.relative_window,
        )

    def forward(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        """(B, L) ids and mask -> (B, L, d) states."""
        x = self.dropout(self.embedding(src_ids) * self.scale)
        return self.encoder(x, src_mask)


class FusionLayer(nn.Module):
    """fused_i = LayerNorm(Affine([w_i ; p_i]) + w_i)"""

    def __init__(self, d_model: int):
        super().__init__()
        self.affine = nn.Linear(2 * d_model, d_model)
        self.norm = nn.LayerNorm(d_model)

    def forward(self, word_states: torch.Tensor, pos_states: torch.Tensor) -> torch.Tensor:
        if word_states.shape != pos_states.shape:
            raise ValueError(
                f"Cannot fuse states of shape {tuple(word_states.shape)} and {tuple(pos_states.shape)}"
            )
        return self.norm(self.affine(torch.cat([word_states, pos_states], dim=-1)) + word_states)


class SequenceDecoder(nn.Module):
    """Causal decoder with an output projection; used for both words and POS tags."""

    def __init__(self, config: ModelConfig, embedding: nn.Embedding, n_outputs: int):
        super().__init__()
        self.embedding = embedding
        self.scale = math.sqrt(config.d_model)
        self.dropout = nn.Dropout(config.dropout)
        self.decoder = TransformerDecoder(
            config.d_model,
            config.n_decoder_layers,
            config.n_heads,
            config.d_ff,
            config.dropout,
            config.relative_window,
        )
        self.output = nn.Linear(config.d_model, n_outputs)

    def forward(
        self,
        input_ids: torch.Tensor,
        memory: torch.Tensor,
        memory_mask: torch.Tensor,
        cache: Optional[DecoderCache] = None,
    ) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Returns:
            (logits (B, K, n_outputs), hidden states (B, K, d), cross-attention (B, K, L))
        """
        x = self.dropout(self.embedding(input_ids) * self.scale)
        hidden, cross = self.decoder(x, memory, memory_mask, cache)
        return self.output(hidden), hidden, cross

    def new_cache(self) -> DecoderCache:
        return self.decoder.new_cache()


def sequence_nll(
    logits: torch.Tensor,
    targets: torch.Tensor,
    ignore_index: int,
    reduction: str = "mean",
) -> torch.Tensor:
    """
    Negative log-likelihood summed over the non-ignored positions of each
    example, then reduced over the batch.

    Args:
        logits: (B, K, C)
        targets: (B, K)
        ignore_index: Target id excluded from the sum
        reduction: "mean" over examples, "sum", or "none" for per-example values
    """
    batch, length, n_classes = logits.shape
    per_token = F.cross_entropy(
        logits.reshape(-1, n_classes),
        targets.reshape(-1),
        ignore_index=ignore_index,
        reduction="none",
    ).view(batch, length)
    per_example = per_token.sum(dim=1)
    return _reduce(per_example, reduction)


def token_loss(logits: torch.Tensor, targets: torch.Tensor, pad_id: int, reduction: str = "mean") -> torch.Tensor:
    """Word-level cross-entropy against the reference ids."""
    return sequence_nll(logits, targets, pad_id, reduction)


def pos_loss(logits: torch.Tensor, tags: torch.Tensor, pad_id: int, reduction: str = "mean") -> torch.Tensor:
    """Tag-level cross-entropy against the gold POS sequence."""
    return sequence_nll(logits, tags, pad_id, reduction)


def _reduce(per_example: torch.Tensor, reduction: str) -> torch.Tensor:
    if reduction == "mean":
        return per_example.mean()
    if reduction == "sum":
        return per_example.sum()
    if reduction == "none":
        return per_example
    raise ValueError(f"Unknown reduction '{reduction}'")
