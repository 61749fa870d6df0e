"""
Padding and linearization of knowledge graphs.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, List, Tuple

from graphscribe.data.tokenizer import tokenize_with_spacing
from graphscribe.data.types import (
    HEAD_MARKER,
    MARKER_PROVENANCE,
    PAD_CLASS,
    PLACEHOLDER_TRIPLET,
    RELATION_MARKER,
    TAIL_MARKER,
    KnowledgeGraph,
    LinearizedKG,
    OrderLabel,
    PaddedGraph,
    Triplet,
)
from graphscribe.errors import InvalidOrderError, OversizeGraphError

if TYPE_CHECKING:
    from graphscribe.supervision.vocab import Vocabulary

logger = logging.getLogger(__name__)


def pad_graph(kg: KnowledgeGraph, n_slots: int) -> PaddedGraph:
    """
    Pad a graph to exactly ``n_slots`` triplet slots.

    Real triplets keep their input order; the remaining slots hold the
    placeholder triplet.
    """
    if n_slots <= 0:
        raise ValueError(f"n_slots must be positive, got {n_slots}")
    n_real = len(kg.triplets)
    if n_real > n_slots:
        raise OversizeGraphError(kg.id, n_real, n_slots)

    triplets = kg.triplets + (PLACEHOLDER_TRIPLET,) * (n_slots - n_real)
    mask = (True,) * n_real + (False,) * (n_slots - n_real)
    return PaddedGraph(triplets=triplets, mask=mask, n_real=n_real)


def fit_graph(kg: KnowledgeGraph, n_slots: int, oversize: str = "reject") -> KnowledgeGraph:
    """Apply the oversize policy: reject (raise) or truncate to the first ``n_slots`` triplets."""
    if len(kg.triplets) <= n_slots:
        return kg
    if oversize == "truncate":
        logger.warning(f"Truncating graph '{kg.id}' from {len(kg.triplets)} to {n_slots} triplets")
        return kg.truncated(n_slots)
    raise OversizeGraphError(kg.id, len(kg.triplets), n_slots)


def check_order(kg: KnowledgeGraph, order: OrderLabel):
    """Raise InvalidOrderError unless ``order`` ranks exactly the graph's real triplets."""
    n_real = len(kg.triplets)
    if order.n_slots < n_real:
        raise InvalidOrderError(
            f"Order covers {order.n_slots} slots but graph '{kg.id}' has {n_real} triplets"
        )
    for slot, rank in enumerate(order.ranks):
        if slot < n_real and rank == PAD_CLASS:
            raise InvalidOrderError(f"Order leaves real triplet slot {slot} of '{kg.id}' unranked")
        if slot >= n_real and rank != PAD_CLASS:
            raise InvalidOrderError(f"Order references placeholder slot {slot} of '{kg.id}'")


def linearize(kg: KnowledgeGraph, order: OrderLabel, vocab: "Vocabulary") -> LinearizedKG:
    """
    Flatten a graph into ``<Head> h <Relation> r <Tail> t`` segments in description order.

    Surface tokens keep their case; ids come from the lowercased tokens.
    """
    check_order(kg, order)

    ids: List[int] = []
    surface: List[str] = []
    spacing: List[bool] = []
    provenance: List[int] = []

    for slot in order.listing():
        triplet = kg.triplets[slot]
        for marker, text in _fields(triplet):
            ids.append(vocab.id_of(marker))
            surface.append(marker)
            spacing.append(True)
            provenance.append(MARKER_PROVENANCE)
            for token in tokenize_with_spacing(text):
                ids.append(vocab.id_of(token.text.lower()))
                surface.append(token.text)
                spacing.append(token.space_before)
                provenance.append(slot)

    return LinearizedKG(
        ids=tuple(ids),
        surface=tuple(surface),
        spacing=tuple(spacing),
        provenance=tuple(provenance),
        order_used=order,
    )


def linearized_tokens(kg: KnowledgeGraph) -> List[str]:
    """Lowercased non-marker tokens of every triplet, for vocabulary building."""
    tokens = []
    for triplet in kg.triplets:
        for _, text in _fields(triplet):
            tokens.extend(token.text.lower() for token in tokenize_with_spacing(text))
    return tokens


def _fields(triplet: Triplet) -> Tuple[Tuple[str, str], ...]:
    return (
        (HEAD_MARKER, triplet.head),
        (RELATION_MARKER, triplet.relation),
        (TAIL_MARKER, triplet.tail),
    )
