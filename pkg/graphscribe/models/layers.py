"""
Transformer building blocks with relative-position self-attention.

Self-attention adds learned relative-position embeddings to keys and values
(distances clipped to a window). Layers are pre-norm. Decoder stacks support
incremental stepping through a DecoderCache that stores each layer's normed
inputs.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

MASKED_SCORE = -1e9


class MultiHeadAttention(nn.Module):
    """
    Multi-head scaled dot-product attention.

    With ``max_relative`` set, queries and keys are given positions and the
    clipped distance ``key_pos - query_pos`` selects a learned embedding that
    is added to the key (for scores) and to the value (for outputs).
    """

    def __init__(self, d_model: int, n_heads: int, dropout: float = 0.0, max_relative: Optional[int] = None):
        super().__init__()
        if d_model % n_heads != 0:
            raise ValueError(f"d_model {d_model} is not divisible by n_heads {n_heads}")
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)
        self.max_relative = max_relative
        if max_relative is not None:
            self.rel_key = nn.Embedding(2 * max_relative + 1, self.d_head)
            self.rel_value = nn.Embedding(2 * max_relative + 1, self.d_head)

    def forward(
        self,
        query: torch.Tensor,
        key: torch.Tensor,
        value: torch.Tensor,
        key_mask: Optional[torch.Tensor] = None,
        causal: bool = False,
        query_offset: int = 0,
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Args:
            query: (B, Lq, d)
            key, value: (B, Lk, d)
            key_mask: (B, Lk) bool, True where attending is allowed
            causal: Forbid keys after the query position
            query_offset: Absolute position of the first query (incremental decoding)

        Returns:
            (output (B, Lq, d), attention weights (B, H, Lq, Lk))
        """
        batch, q_len, _ = query.shape
        k_len = key.shape[1]

        q = self._split(self.q_proj(query))
        k = self._split(self.k_proj(key))
        v = self._split(self.v_proj(value))

        scores = q @ k.transpose(-2, -1)
        rel = None
        if self.max_relative is not None:
            q_pos = torch.arange(q_len, device=query.device) + query_offset
            k_pos = torch.arange(k_len, device=query.device)
            distance = (k_pos[None, :] - q_pos[:, None]).clamp(-self.max_relative, self.max_relative)
            rel = distance + self.max_relative
            scores = scores + torch.einsum("bhqd,qkd->bhqk", q, self.rel_key(rel))
        scores = scores / math.sqrt(self.d_head)

        if key_mask is not None:
            scores = scores.masked_fill(~key_mask[:, None, None, :], MASKED_SCORE)
        if causal:
            q_pos = torch.arange(q_len, device=query.device) + query_offset
            k_pos = torch.arange(k_len, device=query.device)
            future = k_pos[None, :] > q_pos[:, None]
            scores = scores.masked_fill(future[None, None], MASKED_SCORE)

        weights = torch.softmax(scores, dim=-1)
        dropped = self.dropout(weights)
        out = dropped @ v
        if rel is not None:
            out = out + torch.einsum("bhqk,qkd->bhqd", dropped, self.rel_value(rel))

        out = out.transpose(1, 2).reshape(batch, q_len, self.n_heads * self.d_head)
        return self.out_proj(out), weights

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.n_heads, self.d_head).transpose(1, 2)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float = 0.0):
        super().__init__()
        self.linear1 = nn.Linear(d_model, d_ff)
        self.linear2 = nn.Linear(d_ff, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.linear2(self.dropout(F.relu(self.linear1(x))))


class EncoderLayer(nn.Module):
    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout: float, max_relative: int):
        super().__init__()
        self.self_attn = MultiHeadAttention(d_model, n_heads, dropout, max_relative)
        self.feed_forward = FeedForward(d_model, d_ff, dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        h = self.norm1(x)
        attended, _ = self.self_attn(h, h, h, key_mask=mask)
        x = x + self.dropout(attended)
        return x + self.dropout(self.feed_forward(self.norm2(x)))


class DecoderLayer(nn.Module):
    def __init__(self, d_model: int, n_heads: int, d_ff: int, dropout: float, max_relative: int):
        super().__init__()
        self.self_attn = MultiHeadAttention(d_model, n_heads, dropout, max_relative)
        self.cross_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.feed_forward = FeedForward(d_model, d_ff, dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.norm3 = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(
        self,
        x: torch.Tensor,
        memory: torch.Tensor,
        memory_mask: torch.Tensor,
        past: Optional[torch.Tensor] = None,
    ) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Args:
            x: (B, Lq, d) new positions
            memory: (B, Ls, d) encoder states
            memory_mask: (B, Ls)
            past: (B, t, d) normed inputs of earlier positions, or None

        Returns:
            (output, cross-attention weights, normed inputs of the new positions)
        """
        h = self.norm1(x)
        offset = 0 if past is None else past.shape[1]
        context = h if past is None else torch.cat([past, h], dim=1)
        attended, _ = self.self_attn(h, context, context, causal=True, query_offset=offset)
        x = x + self.dropout(attended)

        crossed, cross_weights = self.cross_attn(self.norm2(x), memory, memory, key_mask=memory_mask)
        x = x + self.dropout(crossed)
        x = x + self.dropout(self.feed_forward(self.norm3(x)))
        return x, cross_weights, h


class DecoderCache:
    """Per-layer normed inputs of the positions decoded so far."""

    def __init__(self, n_layers: int):
        self.layers: List[Optional[torch.Tensor]] = [None] * n_layers

    def __len__(self) -> int:
        first = self.layers[0]
        return 0 if first is None else first.shape[1]

    def append(self, index: int, states: torch.Tensor):
        past = self.layers[index]
        self.layers[index] = states if past is None else torch.cat([past, states], dim=1)

    def select(self, indices: torch.Tensor) -> "DecoderCache":
        """Reorder along the batch axis (beam search keeps surviving hypotheses)."""
        cache = DecoderCache(len(self.layers))
        cache.layers = [None if s is None else s.index_select(0, indices) for s in self.layers]
        return cache


class TransformerEncoder(nn.Module):
    def __init__(self, d_model: int, n_layers: int, n_heads: int, d_ff: int, dropout: float, max_relative: int):
        super().__init__()
        self.layers = nn.ModuleList(
            [EncoderLayer(d_model, n_heads, d_ff, dropout, max_relative) for _ in range(n_layers)]
        )
        self.norm = nn.LayerNorm(d_model)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        for layer in self.layers:
            x = layer(x, mask)
        return self.norm(x)


class TransformerDecoder(nn.Module):
    def __init__(self, d_model: int, n_layers: int, n_heads: int, d_ff: int, dropout: float, max_relative: int):
        super().__init__()
        self.layers = nn.ModuleList(
            [DecoderLayer(d_model, n_heads, d_ff, dropout, max_relative) for _ in range(n_layers)]
        )
        self.norm = nn.LayerNorm(d_model)

    def forward(
        self,
        x: torch.Tensor,
        memory: torch.Tensor,
        memory_mask: torch.Tensor,
        cache: Optional[DecoderCache] = None,
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Decode ``x`` (full sequence, or the next positions when ``cache`` is given).

        Returns:
            (hidden states (B, Lq, d), last-layer cross-attention averaged over heads (B, Lq, Ls))
        """
        cross = None
        for index, layer in enumerate(self.layers):
            past = None if cache is None else cache.layers[index]
            x, cross, normed = layer(x, memory, memory_mask, past)
            if cache is not None:
                cache.append(index, normed)
        return self.norm(x), cross.mean(dim=1)

    def new_cache(self) -> DecoderCache:
        return DecoderCache(len(self.layers))
