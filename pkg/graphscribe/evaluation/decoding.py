"""
Decoding: length-normalised beam search and greedy decoding under the copy
threshold rule.

Search runs against a ``DecodingSession``, which proposes scored extensions
for a set of live hypotheses. ``ModelSession`` wraps a trained model; tests
drive the same search with hand-built sessions.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Protocol, Sequence

import numpy as np
import torch

from graphscribe.data.graph import linearize
from graphscribe.data.types import KnowledgeGraph, LinearizedKG, OrderLabel
from graphscribe.models.config import OrderMode
from graphscribe.models.copy_gate import (
    COPY_EPS,
    CopyDecision,
    GateScores,
    copy_candidate,
    copy_weights,
    select_token,
)
from graphscribe.models.model import DecodeStep, GraphToTextModel, log_softmax_masked
from graphscribe.models.ordering import resolve_order
from graphscribe.supervision.vocab import Vocabulary

logger = logging.getLogger(__name__)


@dataclass
class Expansion:
    """One way to extend a hypothesis by a single token."""
    token_id: int
    score: float
    decision: Optional[CopyDecision] = None


@dataclass
class Hypothesis:
    tokens: List[int] = field(default_factory=list)
    score: float = 0.0
    trace: List[CopyDecision] = field(default_factory=list)
    finished: bool = False

    def __len__(self) -> int:
        return len(self.tokens)

    def normalized(self, alpha: float = 1.0) -> float:
        return self.score / (max(1, len(self.tokens)) ** alpha)

    def extend(self, expansion: Expansion, finished: bool = False) -> "Hypothesis":
        trace = self.trace + [expansion.decision] if expansion.decision is not None else list(self.trace)
        return Hypothesis(
            tokens=self.tokens + [expansion.token_id],
            score=self.score + expansion.score,
            trace=trace,
            finished=finished,
        )


class DecodingSession(Protocol):
    """Proposes extensions for live hypotheses; owns any incremental state."""

    bos_id: int
    eos_id: Optional[int]

    def expand(self, parents: Sequence[int], last_tokens: Sequence[int], k: int) -> List[List[Expansion]]:
        """
        Args:
            parents: Index of the hypothesis (from the previous call) each live one extends
            last_tokens: Last token of each live hypothesis
            k: Upper bound on extensions per hypothesis

        Returns:
            Extensions for each live hypothesis
        """
        ...


@dataclass
class BeamResult:
    best: Hypothesis
    hypotheses: List[Hypothesis]


def beam_search(session: DecodingSession, beam: int, max_len: int, alpha: float = 1.0) -> BeamResult:
    """
    Length-normalised beam search with nested slots.

    Slot ``j`` (1-based) of each step goes to the best unclaimed extension of
    a hypothesis held in slots ``1..j``, taken from that hypothesis's ``j``
    best options. Slots ``1..j`` therefore hold exactly what a width-``j``
    search holds, so slot 1 is the greedy path and the best returned score
    never drops as ``beam`` grows. All live hypotheses share a length, so
    ranking them by accumulated score agrees with the normalised ranking.
    A finished hypothesis keeps its slot for that step.

    Search runs until no hypothesis is alive or ``max_len`` tokens; ties go to
    the lower slot, then the lower token id. Finished and length-capped
    hypotheses are ranked by ``score / len ** alpha``.

    With a ``ModelSession`` each hypothesis is extended either by the single
    copy candidate (p_copy at or above the threshold) or by its best generated
    tokens, never by both.
    """
    if beam < 1:
        raise ValueError(f"Beam size must be at least 1, got {beam}")

    alive = [Hypothesis()]
    slots = [0]
    parents = [0]
    last_tokens = [session.bos_id]
    finished: List[Hypothesis] = []

    for _ in range(max_len):
        expansions = session.expand(parents, last_tokens, beam)
        candidates = []
        for h, (hyp, options) in enumerate(zip(alive, expansions)):
            for rank, option in enumerate(options):
                if not math.isfinite(option.score):
                    continue
                candidates.append((-(hyp.score + option.score), slots[h], option.token_id, rank, h, option))
        candidates.sort(key=lambda c: c[:3])

        next_alive: List[Hypothesis] = []
        next_slots, parents, last_tokens = [], [], []
        claimed = set()
        for slot in range(beam):
            index = next(
                (i for i, c in enumerate(candidates) if i not in claimed and c[1] <= slot and c[3] <= slot),
                None,
            )
            if index is None:
                continue
            claimed.add(index)
            _, _, token_id, _, h, option = candidates[index]
            if session.eos_id is not None and token_id == session.eos_id:
                finished.append(alive[h].extend(option, finished=True))
                continue
            next_alive.append(alive[h].extend(option))
            next_slots.append(slot)
            parents.append(h)
            last_tokens.append(token_id)

        alive, slots = next_alive, next_slots
        if not alive:
            break

    pool = finished + alive
    if not pool:
        logger.warning("Beam search produced no hypothesis; returning an empty one")
        pool = [Hypothesis()]
    ranked = sorted(
        enumerate(pool), key=lambda item: (-item[1].normalized(alpha), item[0])
    )
    hypotheses = [hyp for _, hyp in ranked]
    return BeamResult(best=hypotheses[0], hypotheses=hypotheses)


class ModelSession:
    """
    Decoding session backed by a GraphToTextModel for one linearized graph.

    Args:
        model: The model, in eval mode
        lin: Linearized source
        vocab: Vocabulary
        threshold: Copy threshold
        max_len: Cap on generated tokens (also bounds the POS pre-decode)
    """

    def __init__(self, model: GraphToTextModel, lin: LinearizedKG, vocab: Vocabulary,
                 threshold: float = 0.5, max_len: Optional[int] = None):
        self.model = model
        self.lin = lin
        self.vocab = vocab
        self.threshold = threshold
        self.state = model.start_decoding(lin, max_len)
        blocked = [i for i in vocab.special_ids if i != vocab.eos_id]
        self.mask = model.generation_mask(blocked)
        self.bos_id = vocab.bos_id
        self.eos_id = vocab.eos_id

    def _step(self, parents: Sequence[int], last_tokens: Sequence[int]):
        step = self.model.decode_step(self.state, parents, last_tokens)
        return step, log_softmax_masked(step.word_logits, self.mask)

    @staticmethod
    def _gate_at(step: DecodeStep, h: int) -> Optional[GateScores]:
        gate = step.gate
        if gate is None:
            return None
        return GateScores(
            t_copy=gate.t_copy[h],
            x_semantic=None if gate.x_semantic is None else gate.x_semantic[h],
            p_copy=gate.p_copy[h],
        )

    def _score(self, decision: CopyDecision, step: DecodeStep, h: int, log_probs: torch.Tensor) -> float:
        if decision.p_copy is None:
            return float(log_probs[h, decision.token_id])
        if decision.copied:
            weights = copy_weights(step.cross_attention[h], self.lin, step.word_logits[h], self.vocab.unk_id)
            weight = float(weights[decision.source_position])
            return math.log(max(decision.p_copy, COPY_EPS)) + math.log(max(weight, COPY_EPS))
        return math.log(max(1.0 - decision.p_copy, COPY_EPS)) + float(log_probs[h, decision.token_id])

    def expand(self, parents: Sequence[int], last_tokens: Sequence[int], k: int) -> List[List[Expansion]]:
        step, log_probs = self._step(parents, last_tokens)
        return [self._admissible(step, h, log_probs, k) for h in range(len(parents))]

    def _admissible(self, step: DecodeStep, h: int, log_probs: torch.Tensor, k: int) -> List[Expansion]:
        """The copy candidate alone when p_copy reaches the threshold, else the top ``k`` generated tokens."""
        gate = self._gate_at(step, h)
        t_copy = x_sem = p_copy = None
        if gate is not None:
            t_copy = float(gate.t_copy)
            x_sem = None if gate.x_semantic is None else float(gate.x_semantic)
            p_copy = float(gate.p_copy)

        if p_copy is not None and p_copy >= self.threshold:
            candidate = copy_candidate(step.cross_attention[h], self.lin, step.word_logits[h], self.vocab.unk_id)
            if candidate is not None:
                decision = CopyDecision(
                    t_copy=t_copy, x_semantic=x_sem, p_copy=p_copy, source="copied",
                    token_id=candidate.token_id, token=candidate.token,
                    source_position=candidate.position, triplet=candidate.triplet,
                )
                return [Expansion(candidate.token_id, self._score(decision, step, h, log_probs), decision)]
            logger.warning("Copy requested but the source has no copyable token; generating instead")

        # stable sort keeps the lower token id first among equal scores
        _, order = torch.sort(log_probs[h], descending=True, stable=True)
        expansions = []
        for token_id in order[:k].tolist():
            decision = CopyDecision(
                t_copy=t_copy, x_semantic=x_sem, p_copy=p_copy, source="generated",
                token_id=token_id, token=self.vocab.token_of(token_id),
            )
            expansions.append(Expansion(token_id, self._score(decision, step, h, log_probs), decision))
        return expansions

    def choose(self, last_token: int) -> Expansion:
        """Greedy step for a single hypothesis."""
        step, log_probs = self._step([0], [last_token])
        gate = self._gate_at(step, 0)
        decision = select_token(
            step.word_logits[0] + self.mask, step.cross_attention[0], gate,
            self.lin, self.vocab, self.threshold, copy_logits=step.word_logits[0],
        )
        return Expansion(decision.token_id, self._score(decision, step, 0, log_probs), decision)


def greedy_decode(session: ModelSession, max_len: int) -> Hypothesis:
    """Apply the threshold rule at every step until ``<eos>`` or ``max_len``."""
    hyp = Hypothesis()
    last = session.bos_id
    for _ in range(max_len):
        expansion = session.choose(last)
        done = expansion.token_id == session.eos_id
        hyp = hyp.extend(expansion, finished=done)
        if done:
            break
        last = expansion.token_id
    return hyp


@dataclass
class Generation:
    """A decoded sentence for one graph."""
    id: str
    text: str
    tokens: List[str]
    score: float
    order: OrderLabel
    trace: List[CopyDecision]

    @property
    def copy_rate(self) -> float:
        if not self.trace:
            return 0.0
        return sum(1 for d in self.trace if d.copied) / len(self.trace)


def surface_tokens(hyp: Hypothesis, eos_id: Optional[int]) -> List[str]:
    return [d.token for d in hyp.trace if d.token_id != eos_id]


def generate(
    model: GraphToTextModel,
    kg: KnowledgeGraph,
    vocab: Vocabulary,
    order_mode: OrderMode | str = OrderMode.LEARNED,
    beam: int = 5,
    max_len: Optional[int] = None,
    threshold: Optional[float] = None,
    gold: Optional[OrderLabel] = None,
    rng: Optional[np.random.Generator] = None,
    alpha: float = 1.0,
) -> Generation:
    """
    Order, linearize and decode one graph.

    Args:
        model: Trained model
        kg: Graph to verbalize
        vocab: Vocabulary the model was trained with
        order_mode: How to order the triplets
        beam: Beam width; 1 runs greedy decoding
        max_len: Cap on generated tokens (defaults to the model's target length)
        threshold: Copy threshold (defaults to the model config)
        gold: Reference order, required by the gold mode
        rng: Randomness for the random mode
        alpha: Length-normalisation exponent
    """
    max_len = max_len or model.config.max_target_len
    threshold = model.config.copy_threshold if threshold is None else threshold
    was_training = model.training
    model.eval()
    try:
        order = resolve_order(order_mode, kg, model.config.n_slots, model=model, gold=gold, rng=rng)
        lin = linearize(kg, order, vocab)
        session = ModelSession(model, lin, vocab, threshold, max_len)
        if beam == 1:
            best = greedy_decode(session, max_len)
        else:
            best = beam_search(session, beam, max_len, alpha).best
    finally:
        model.train(was_training)

    tokens = surface_tokens(best, vocab.eos_id)
    return Generation(
        id=kg.id,
        text=" ".join(tokens),
        tokens=tokens,
        score=best.score,
        order=order,
        trace=best.trace,
    )


def write_traces(generations: Iterable[Generation], path: Path):
    """One JSON line per decoding step: example id, step index and the copy decision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for generation in generations:
            for step, decision in enumerate(generation.trace):
                row = {"id": generation.id, "step": step, **decision.to_dict()}
                f.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
