"""
The full graph-to-text model: sorter, word encoder-decoder, POS generator
with fusion, and the copy gate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from graphscribe.data.graph import pad_graph
from graphscribe.data.types import KnowledgeGraph, LinearizedKG, OrderLabel
from graphscribe.errors import DataError
from graphscribe.models.config import AblationFlags, ModelConfig, OrderMode, PosScope
from graphscribe.models.copy_gate import CopyGate, GateScores
from graphscribe.models.layers import DecoderCache
from graphscribe.models.seq2seq import FusionLayer, SequenceDecoder, SourceEncoder
from graphscribe.models.sorting import (
    NodeSortingNetwork,
    SortingNetwork,
    TripletEncoder,
    decode_order,
    hash_graph,
    node_order,
)

logger = logging.getLogger(__name__)


@dataclass
class EncodedSource:
    memory: torch.Tensor
    pos_memory: torch.Tensor
    mask: torch.Tensor


@dataclass
class ModelOutput:
    word_logits: torch.Tensor
    pos_logits: torch.Tensor
    sort_log_probs: torch.Tensor
    node_log_probs: Optional[torch.Tensor]
    gate: Optional[GateScores]
    cross_attention: torch.Tensor


@dataclass
class DecodeStep:
    """One incremental step for H hypotheses."""
    word_logits: torch.Tensor
    pos_logits: torch.Tensor
    hidden: torch.Tensor
    v_w: torch.Tensor
    v_p: torch.Tensor
    cross_attention: torch.Tensor
    gate: Optional[GateScores]


class DecoderState:
    """
    Incremental decoding state for one source.

    Holds the encoded source, the POS sequence predicted up front, the word
    decoder cache and the decoder input embedding history. Never share a
    state between decoding sessions.
    """

    def __init__(self, encoded: EncodedSource, tags: List[int], pos_logits: torch.Tensor,
                 pos_final: torch.Tensor, cache: DecoderCache):
        self.encoded = encoded
        self.tags = tags
        self.pos_logits = pos_logits
        self.pos_final = pos_final
        self.cache = cache
        self.history: Optional[torch.Tensor] = None
        self.step = 0


class GraphToTextModel(nn.Module):
    """
    Args:
        config: Model sizes (vocab_size and tagset_size must be set)
        ablation: Components to remove
        pad_id: Vocabulary pad id
        tag_pad_id, tag_bos_id, tag_eos_id: Tagset specials
    """

    def __init__(
        self,
        config: ModelConfig,
        ablation: Optional[AblationFlags] = None,
        pad_id: int = 0,
        tag_pad_id: int = 0,
        tag_bos_id: int = 1,
        tag_eos_id: int = 2,
    ):
        super().__init__()
        if config.vocab_size <= 0 or config.tagset_size <= 0:
            raise ValueError("ModelConfig.vocab_size and tagset_size must be set before building the model")
        self.config = config
        self.ablation = ablation or AblationFlags()
        self.pad_id = pad_id
        self.tag_pad_id = tag_pad_id
        self.tag_bos_id = tag_bos_id
        self.tag_eos_id = tag_eos_id

        d = config.d_model
        self.word_embedding = nn.Embedding(config.vocab_size, d, padding_idx=pad_id)
        self.word_encoder = SourceEncoder(config, self.word_embedding)
        self.pos_source_embedding = nn.Embedding(config.vocab_size, d, padding_idx=pad_id)
        self.pos_encoder = SourceEncoder(config, self.pos_source_embedding)
        self.fusion = FusionLayer(d)
        self.word_decoder = SequenceDecoder(config, self.word_embedding, config.vocab_size)
        self.tag_embedding = nn.Embedding(config.tagset_size, d, padding_idx=tag_pad_id)
        self.pos_decoder = SequenceDecoder(config, self.tag_embedding, config.tagset_size)

        self.triplet_encoder = TripletEncoder(config.hash_buckets, config.embed_dim)
        self.sorter = SortingNetwork(config.n_slots, config.slot_dim, config.sorter_hidden)
        self.node_sorter = NodeSortingNetwork(
            config.n_slots, config.hash_buckets, config.embed_dim, config.sorter_hidden
        )

        self.copy_gate = CopyGate(
            d,
            window_sizes=config.window_sizes,
            scorer_hidden=config.scorer_hidden,
            lam=config.copy_lambda,
            use_pos=not self.ablation.no_pos,
            use_semantic=not self.ablation.no_sc,
        )

    @property
    def copy_enabled(self) -> bool:
        return not self.ablation.no_cp

    @property
    def pad_embedding(self) -> torch.Tensor:
        return self.word_embedding.weight[self.pad_id]

    def encode_words(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        return self.word_encoder(src_ids, src_mask)

    def encode_pos(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        return self.pos_encoder(src_ids, src_mask)

    def encode(self, src_ids: torch.Tensor, src_mask: torch.Tensor) -> EncodedSource:
        word_states = self.encode_words(src_ids, src_mask)
        pos_states = self.encode_pos(src_ids, src_mask)
        memory = word_states if self.ablation.no_pos_fusion else self.fusion(word_states, pos_states)
        return EncodedSource(memory=memory, pos_memory=pos_states, mask=src_mask)

    def score_positions(self, buckets: torch.Tensor, slot_mask: torch.Tensor) -> torch.Tensor:
        return self.sorter(self.triplet_encoder(buckets, slot_mask))

    def forward(
        self,
        src_ids: torch.Tensor,
        src_mask: torch.Tensor,
        tgt_in: torch.Tensor,
        tag_in: torch.Tensor,
        tag_out: torch.Tensor,
        tgt_mask: torch.Tensor,
        buckets: torch.Tensor,
        slot_mask: torch.Tensor,
    ) -> ModelOutput:
        """Teacher-forced pass over a batch."""
        encoded = self.encode(src_ids, src_mask)
        pos_logits, pos_hidden, _ = self.pos_decoder(tag_in, encoded.pos_memory, src_mask)
        word_logits, hidden, cross = self.word_decoder(tgt_in, encoded.memory, src_mask)

        gate = None
        if self.copy_enabled:
            v_w = self.word_embedding(tgt_in)
            v_p = self._pos_features(tag_out, pos_hidden, tgt_mask)
            gate = self.copy_gate(v_w, v_p, hidden, v_w, self.pad_embedding)

        node_log_probs = None
        if self.ablation.order_mode == OrderMode.NODE_LEVEL:
            node_log_probs = self.node_sorter(buckets, slot_mask)

        return ModelOutput(
            word_logits=word_logits,
            pos_logits=pos_logits,
            sort_log_probs=self.score_positions(buckets, slot_mask),
            node_log_probs=node_log_probs,
            gate=gate,
            cross_attention=cross,
        )

    def _pos_features(self, tag_out: torch.Tensor, pos_hidden: torch.Tensor, tgt_mask: torch.Tensor) -> torch.Tensor:
        if self.config.pos_scope == PosScope.GLOBAL:
            last = tgt_mask.long().sum(dim=1).clamp(min=1) - 1
            final = pos_hidden[torch.arange(pos_hidden.shape[0]), last]
            return final.unsqueeze(1).expand_as(pos_hidden)
        return self.tag_embedding(tag_out)

    # inference

    def source_tensors(self, lin: LinearizedKG):
        ids = list(lin.ids)
        limit = self.config.max_source_len
        if len(ids) > limit:
            if self.config.overlong == "error":
                raise DataError(f"Linearized source has {len(ids)} tokens, more than {limit}")
            logger.warning(f"Truncating linearized source from {len(ids)} to {limit} tokens")
            ids = ids[:limit]
        src = torch.tensor([ids], dtype=torch.long, device=self._device)
        return src, torch.ones_like(src, dtype=torch.bool)

    @property
    def _device(self) -> torch.device:
        return self.word_embedding.weight.device

    @torch.no_grad()
    def start_decoding(self, lin: LinearizedKG, max_len: Optional[int] = None) -> DecoderState:
        """Encode the source and decode its POS sequence greedily."""
        src, mask = self.source_tensors(lin)
        encoded = self.encode(src, mask)
        max_len = max_len or self.config.max_target_len

        cache = self.pos_decoder.new_cache()
        tag = self.tag_bos_id
        tags: List[int] = []
        logits_steps = []
        hidden = None
        for _ in range(max_len):
            step_in = torch.tensor([[tag]], dtype=torch.long, device=self._device)
            logits, hidden, _ = self.pos_decoder(step_in, encoded.pos_memory, mask, cache)
            logits_steps.append(logits[:, -1])
            tag = int(logits[0, -1].argmax())
            tags.append(tag)
            if tag == self.tag_eos_id:
                break
        return DecoderState(
            encoded=encoded,
            tags=tags,
            pos_logits=torch.stack(logits_steps, dim=1),
            pos_final=hidden[:, -1],
            cache=self.word_decoder.new_cache(),
        )

    @torch.no_grad()
    def decode_step(self, state: DecoderState, parents: Sequence[int], last_tokens: Sequence[int]) -> DecodeStep:
        """
        Advance every hypothesis by one token.

        Args:
            state: Decoding state, updated in place
            parents: For each new hypothesis, the index of the hypothesis it extends
            last_tokens: The token each new hypothesis was extended with
        """
        device = self._device
        index = torch.tensor(list(parents), dtype=torch.long, device=device)
        if state.step > 0:
            state.cache = state.cache.select(index)
            state.history = state.history.index_select(0, index)
        n_hyps = len(parents)

        tokens = torch.tensor(list(last_tokens), dtype=torch.long, device=device).view(n_hyps, 1)
        memory = state.encoded.memory.expand(n_hyps, -1, -1)
        mask = state.encoded.mask.expand(n_hyps, -1)
        logits, hidden, cross = self.word_decoder(tokens, memory, mask, state.cache)

        v_w = self.word_embedding(tokens)
        state.history = v_w if state.history is None else torch.cat([state.history, v_w], dim=1)

        k = state.step
        if self.config.pos_scope == PosScope.GLOBAL:
            v_p = state.pos_final.view(1, 1, -1).expand(n_hyps, 1, -1)
        else:
            tag = state.tags[k] if k < len(state.tags) else self.tag_eos_id
            v_p = self.tag_embedding(torch.tensor([[tag]], device=device)).expand(n_hyps, 1, -1)

        gate = None
        if self.copy_enabled:
            scores = self.copy_gate(v_w, v_p, hidden, state.history, self.pad_embedding)
            gate = GateScores(
                t_copy=scores.t_copy[:, -1],
                x_semantic=None if scores.x_semantic is None else scores.x_semantic[:, -1],
                p_copy=scores.p_copy[:, -1],
            )

        pos_step = min(k, state.pos_logits.shape[1] - 1)
        state.step += 1
        return DecodeStep(
            word_logits=logits[:, -1],
            pos_logits=state.pos_logits[:, pos_step].expand(n_hyps, -1),
            hidden=hidden[:, -1],
            v_w=v_w[:, -1],
            v_p=v_p[:, -1],
            cross_attention=cross[:, -1],
            gate=gate,
        )

    @torch.no_grad()
    def predict_order(self, kg: KnowledgeGraph, mode: OrderMode = OrderMode.LEARNED) -> OrderLabel:
        """Learned (triplet-level) or node-level description order for a graph."""
        pg = pad_graph(kg, self.config.n_slots)
        buckets = hash_graph(pg, self.config.hash_buckets).unsqueeze(0).to(self._device)
        slot_mask = torch.tensor([pg.mask], dtype=torch.bool, device=self._device)
        if mode == OrderMode.NODE_LEVEL:
            return node_order(self.node_sorter(buckets, slot_mask)[0], pg.n_real)
        return decode_order(self.score_positions(buckets, slot_mask)[0], pg.n_real, self.config.assignment)

    def generation_mask(self, blocked_ids: Sequence[int]) -> torch.Tensor:
        """Additive mask over the vocabulary that forbids generating ``blocked_ids``."""
        mask = torch.zeros(self.config.vocab_size, device=self._device)
        mask[list(blocked_ids)] = float("-inf")
        return mask


def log_softmax_masked(logits: torch.Tensor, mask: Optional[torch.Tensor]) -> torch.Tensor:
    return F.log_softmax(logits if mask is None else logits + mask, dim=-1)
