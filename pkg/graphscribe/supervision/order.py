"""
Ground-truth description order.

A triplet is described once the reference has mentioned all of its entities
that it mentions at all, so its position is the latest first-mention among
its head and tail. Earlier single mentions break ties, then input order.
Triplets whose entities never appear follow the mentioned ones in input
order.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

from graphscribe.data.tokenizer import tokenize
from graphscribe.data.types import KnowledgeGraph, OrderLabel


def find_mentions(entity: str, reference: Sequence[str]) -> List[int]:
    """Start offsets of every case-insensitive token-level match of ``entity``."""
    needle = tokenize(entity)
    haystack = [token.lower() for token in reference]
    width = len(needle)
    if width == 0 or width > len(haystack):
        return []
    return [
        start
        for start in range(len(haystack) - width + 1)
        if haystack[start:start + width] == needle
    ]


def first_mentions(kg: KnowledgeGraph, reference: Sequence[str]) -> Dict[str, Optional[int]]:
    """First mention offset per entity surface form (None when absent)."""
    found: Dict[str, Optional[int]] = {}
    for entity in kg.entities():
        offsets = find_mentions(entity, reference)
        found[entity] = offsets[0] if offsets else None
    return found


def extract_gt_order(
    kg: KnowledgeGraph,
    reference: Sequence[str],
    n_slots: Optional[int] = None,
) -> OrderLabel:
    """
    Rank the graph's triplets by where the reference describes them.

    Args:
        kg: The graph
        reference: Tokenized reference (case is ignored)
        n_slots: Pad the label to this many slots

    Returns:
        OrderLabel with one rank per input slot
    """
    mentions = first_mentions(kg, reference)

    mentioned = []
    unmentioned = []
    for index, triplet in enumerate(kg.triplets):
        offsets = [mentions[e] for e in triplet.entities() if mentions[e] is not None]
        if offsets:
            mentioned.append(((max(offsets), min(offsets), index), index))
        else:
            unmentioned.append(index)

    listing = [index for _, index in sorted(mentioned)] + unmentioned
    return OrderLabel.from_listing(listing, n_slots or len(kg.triplets))
