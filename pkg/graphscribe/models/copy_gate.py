"""
Copy-or-generate gate.

The gate mixes a learned copy score t_copy (from the decoder input embedding,
the POS embedding and the decoder state) with a semantic context score over a
sliding window of recent decoder input embeddings:

    p_copy = lambda * x_semantic + (1 - lambda) * t_copy
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import torch
import torch.nn as nn

from graphscribe.data.types import LinearizedKG
from graphscribe.errors import ConfigError

logger = logging.getLogger(__name__)

COPY_EPS = 1e-7


def context_windows(embeddings: torch.Tensor, window: int, pad: torch.Tensor) -> torch.Tensor:
    """
    Flattened windows for every step.

    Args:
        embeddings: (B, K, d) decoder input embeddings
        window: w >= 1
        pad: (d,) fill for steps before the start

    Returns:
        (B, K, w * d); step k holds steps k-w+1..k in chronological order
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    batch, _, dim = embeddings.shape
    front = pad.view(1, 1, dim).expand(batch, window - 1, dim)
    padded = torch.cat([front, embeddings], dim=1)
    # unfold gives (B, K, d, w)
    windows = padded.unfold(1, window, 1).permute(0, 1, 3, 2)
    return windows.reshape(batch, embeddings.shape[1], window * dim)


def context_window(embeddings: torch.Tensor, k: int, window: int, pad: torch.Tensor) -> torch.Tensor:
    """The window ending at step ``k`` of a (K, d) or (B, K, d) history."""
    squeeze = embeddings.dim() == 2
    if squeeze:
        embeddings = embeddings.unsqueeze(0)
    start = max(0, k - window + 1)
    recent = embeddings[:, start:k + 1]
    flat = context_windows(recent, window, pad)[:, -1]
    return flat.squeeze(0) if squeeze else flat


class SemanticScorer(nn.Module):
    """x_semantic = sigmoid(affine stack(F_context))"""

    def __init__(self, window: int, dim: int, hidden: Optional[int] = 64):
        super().__init__()
        self.window = window
        if hidden:
            self.net = nn.Sequential(nn.Linear(window * dim, hidden), nn.ReLU(), nn.Linear(hidden, 1))
        else:
            self.net = nn.Linear(window * dim, 1)

    def forward(self, context: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.net(context)).squeeze(-1)


def blend(t_copy: torch.Tensor, x_semantic: torch.Tensor, lam: float) -> torch.Tensor:
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"Copy trade-off lambda must be in [0, 1], got {lam}")
    return lam * x_semantic + (1.0 - lam) * t_copy


class CopyGate(nn.Module):
    """t_copy = sigmoid(W1 v_w + W2 v_p + W3 s_k + b), blended with the semantic score."""

    def __init__(
        self,
        dim: int,
        window_sizes: Sequence[int] = (3,),
        scorer_hidden: Optional[int] = 64,
        lam: float = 0.3,
        use_pos: bool = True,
        use_semantic: bool = True,
    ):
        super().__init__()
        if not 0.0 <= lam <= 1.0:
            raise ConfigError(f"Copy trade-off lambda must be in [0, 1], got {lam}")
        self.lam = lam
        self.use_pos = use_pos
        self.use_semantic = use_semantic
        self.w_word = nn.Linear(dim, 1)
        self.w_pos = nn.Linear(dim, 1, bias=False)
        self.w_state = nn.Linear(dim, 1, bias=False)
        self.scorers = nn.ModuleDict(
            {str(w): SemanticScorer(w, dim, scorer_hidden) for w in window_sizes}
        )

    def gate_score(self, v_w: torch.Tensor, v_p: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        score = self.w_word(v_w) + self.w_state(s)
        if self.use_pos:
            score = score + self.w_pos(v_p)
        return torch.sigmoid(score).squeeze(-1)

    def semantic_score(self, embeddings: torch.Tensor, pad: torch.Tensor) -> torch.Tensor:
        """Mean over configured window sizes of the scorer output, for every step of (B, K, d)."""
        scores = [
            scorer(context_windows(embeddings, int(size), pad))
            for size, scorer in self.scorers.items()
        ]
        return torch.stack(scores).mean(dim=0)

    def forward(
        self,
        v_w: torch.Tensor,
        v_p: torch.Tensor,
        s: torch.Tensor,
        history: torch.Tensor,
        pad: torch.Tensor,
    ) -> "GateScores":
        """
        Args:
            v_w, v_p, s: (B, K, d) step inputs
            history: (B, K', d) decoder input embeddings whose last K entries line up with the steps
            pad: (d,) pad embedding for window fill

        Returns:
            GateScores with (B, K) tensors
        """
        t_copy = self.gate_score(v_w, v_p, s)
        if not self.use_semantic:
            return GateScores(t_copy=t_copy, x_semantic=None, p_copy=t_copy)
        steps = v_w.shape[1]
        x_semantic = self.semantic_score(history, pad)[:, -steps:]
        return GateScores(t_copy=t_copy, x_semantic=x_semantic, p_copy=blend(t_copy, x_semantic, self.lam))


@dataclass
class GateScores:
    t_copy: torch.Tensor
    x_semantic: Optional[torch.Tensor]
    p_copy: torch.Tensor


def copy_loss(
    p_copy: torch.Tensor,
    labels: torch.Tensor,
    mask: torch.Tensor,
    eps: float = COPY_EPS,
    reduction: str = "mean",
) -> torch.Tensor:
    """
    Binary cross-entropy between p_copy and the 0-1 labels, summed over the
    unmasked steps of each example.
    """
    p = p_copy.clamp(eps, 1.0 - eps)
    labels = labels.to(p.dtype)
    bce = -(labels * torch.log(p) + (1.0 - labels) * torch.log1p(-p))
    per_example = (bce * mask.to(p.dtype)).sum(dim=1)
    if reduction == "mean":
        return per_example.mean()
    if reduction == "sum":
        return per_example.sum()
    if reduction == "none":
        return per_example
    raise ValueError(f"Unknown reduction '{reduction}'")


@dataclass
class CopyDecision:
    """Outcome of one decoding step."""
    t_copy: Optional[float]
    x_semantic: Optional[float]
    p_copy: Optional[float]
    source: str
    token_id: int
    token: str
    source_position: Optional[int] = None
    triplet: Optional[int] = None

    @property
    def copied(self) -> bool:
        return self.source == "copied"

    def to_dict(self) -> Dict[str, object]:
        return {
            "t_copy": self.t_copy,
            "x_semantic": self.x_semantic,
            "p_copy": self.p_copy,
            "source": self.source,
            "token": self.token,
            "token_id": self.token_id,
            "source_position": self.source_position,
            "triplet": self.triplet,
        }


@dataclass
class CopyCandidate:
    """The source token the gate would copy at a step."""
    position: int
    token_id: int
    token: str
    triplet: int
    attention: float
    weight: float


def copy_weights(
    attention: torch.Tensor,
    lin: LinearizedKG,
    word_logits: Optional[torch.Tensor] = None,
    unk_id: Optional[int] = None,
) -> np.ndarray:
    """
    Distribution over source positions for a copy: attention times the word
    probability of each position's token, renormalised over the copyable
    positions. Positions holding ``unk_id`` share the word mass left over by
    the in-vocabulary source tokens. Without word logits, or when no copyable
    token has word mass, it is the attention alone.
    """
    attn = attention.detach().cpu().double().numpy()
    weights = np.zeros(len(attn))
    positions = [p for p in lin.copyable_positions() if p < len(attn)]
    if not positions:
        return weights
    share = np.clip(attn[positions], 0.0, None)
    if word_logits is not None:
        p_word = torch.softmax(word_logits.detach().cpu().double(), dim=-1).numpy()
        ids = [lin.ids[p] for p in positions]
        support = p_word[ids]
        if unk_id is not None:
            known = sorted({i for i in ids if i != unk_id})
            leftover = max(0.0, 1.0 - float(p_word[known].sum()))
            support = np.where(np.array(ids) == unk_id, leftover, support)
        joint = share * support
        if joint.sum() > 0.0:
            share = joint
    total = share.sum()
    weights[positions] = share / total if total > 0.0 else 1.0 / len(positions)
    return weights


def copy_candidate(
    attention: torch.Tensor,
    lin: LinearizedKG,
    word_logits: Optional[torch.Tensor] = None,
    unk_id: Optional[int] = None,
) -> Optional[CopyCandidate]:
    """
    Copyable source position with the largest copy weight; ties go to the
    lower index. Marker and padding positions are never candidates.

    Args:
        attention: (L,) cross-attention over the source of one step
        lin: The linearized source
        word_logits: (V,) unmasked word logits of the same step; when given,
            a position only wins if the word distribution also supports its token
        unk_id: Id of out-of-vocabulary source tokens
    """
    positions = [p for p in lin.copyable_positions() if p < attention.shape[-1]]
    if not positions:
        return None
    weights = copy_weights(attention, lin, word_logits, unk_id)
    best = positions[int(np.argmax(weights[positions]))]
    return CopyCandidate(
        position=best,
        token_id=lin.ids[best],
        token=lin.surface[best],
        triplet=lin.provenance[best],
        attention=float(attention[best]),
        weight=float(weights[best]),
    )


def select_token(
    word_logits: torch.Tensor,
    attention: torch.Tensor,
    scores: Optional[GateScores],
    lin: LinearizedKG,
    vocab,
    threshold: float = 0.5,
    copy_logits: Optional[torch.Tensor] = None,
) -> CopyDecision:
    """
    Copy the KG token with the largest copy weight when p_copy >= threshold,
    otherwise emit the argmax of the word logits.

    Args:
        word_logits: (V,) logits of one step
        attention: (L,) cross-attention over the source of one step
        scores: Gate scores of this step (scalars), or None when copying is disabled
        lin: The linearized source
        vocab: Vocabulary for generated tokens
        threshold: Copy threshold
        copy_logits: (V,) logits that weight copy positions; defaults to ``word_logits``
    """
    t_copy = x_sem = p_copy = None
    if scores is not None:
        t_copy = float(scores.t_copy)
        x_sem = None if scores.x_semantic is None else float(scores.x_semantic)
        p_copy = float(scores.p_copy)

    if p_copy is not None and p_copy >= threshold:
        candidate = copy_candidate(
            attention, lin, word_logits if copy_logits is None else copy_logits, vocab.unk_id
        )
        if candidate is not None:
            return CopyDecision(
                t_copy=t_copy,
                x_semantic=x_sem,
                p_copy=p_copy,
                source="copied",
                token_id=candidate.token_id,
                token=candidate.token,
                source_position=candidate.position,
                triplet=candidate.triplet,
            )
        logger.warning("Copy requested but the source has no copyable token; generating instead")

    token_id = int(torch.argmax(word_logits).item())
    return CopyDecision(
        t_copy=t_copy,
        x_semantic=x_sem,
        p_copy=p_copy,
        source="generated",
        token_id=token_id,
        token=vocab.token_of(token_id),
    )
