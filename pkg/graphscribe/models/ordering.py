"""
Choosing the linearization order for a graph under each order mode.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

import numpy as np

from graphscribe.data.types import KnowledgeGraph, OrderLabel
from graphscribe.errors import DataError
from graphscribe.models.config import OrderMode

if TYPE_CHECKING:
    from graphscribe.models.model import GraphToTextModel


def random_order(kg: KnowledgeGraph, n_slots: int, rng: np.random.Generator) -> OrderLabel:
    listing = [int(i) for i in rng.permutation(len(kg.triplets))]
    return OrderLabel.from_listing(listing, n_slots)


def resolve_order(
    mode: OrderMode | str,
    kg: KnowledgeGraph,
    n_slots: int,
    model: Optional["GraphToTextModel"] = None,
    gold: Optional[OrderLabel] = None,
    rng: Optional[np.random.Generator] = None,
) -> OrderLabel:
    """
    Args:
        mode: learned, node_level, random, gold or input
        kg: The graph
        n_slots: Padded slot count
        model: Needed for learned and node_level
        gold: Needed for gold
        rng: Source of randomness for random (seeded by the caller)
    """
    mode = OrderMode(mode)
    if mode == OrderMode.INPUT:
        return OrderLabel.identity(len(kg.triplets), n_slots)
    if mode == OrderMode.GOLD:
        if gold is None:
            raise DataError(f"Gold order requested for '{kg.id}' but no reference order is available")
        return gold.resized(n_slots)
    if mode == OrderMode.RANDOM:
        return random_order(kg, n_slots, rng if rng is not None else np.random.default_rng(0))
    if model is None:
        raise ValueError(f"Order mode '{mode.value}' needs a model")
    return model.predict_order(kg, mode)
