"""
0-1 copy labels over reference tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from graphscribe.data.tokenizer import tokenize
from graphscribe.data.types import KnowledgeGraph
from graphscribe.supervision.order import find_mentions


@dataclass(frozen=True)
class MentionSpan:
    """Token range [start, end) matching an entity of triplet ``triplet``."""
    start: int
    end: int
    triplet: int

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "MentionSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class CopyLabelSequence:
    """
    Per-token copy labels: 1 for tokens inside an entity mention, 0 otherwise.

    ``spans`` lists every match (they may overlap); ``resolved_spans()``
    picks a non-overlapping subset, longest first and then leftmost.
    """
    labels: Tuple[int, ...]
    spans: Tuple[MentionSpan, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def copy_rate(self) -> float:
        return sum(self.labels) / len(self.labels) if self.labels else 0.0

    def resolved_spans(self) -> List[MentionSpan]:
        chosen: List[MentionSpan] = []
        for span in sorted(self.spans, key=lambda s: (-len(s), s.start, s.triplet)):
            if not any(span.overlaps(other) for other in chosen):
                chosen.append(span)
        return sorted(chosen, key=lambda s: s.start)


def generate_copy_labels(kg: KnowledgeGraph, reference: Sequence[str]) -> CopyLabelSequence:
    """
    Label every reference token covered by an exact, case-insensitive match
    of some head or tail surface form. Relations never contribute.
    """
    owner = {}
    for index, triplet in enumerate(kg.triplets):
        for entity in triplet.entities():
            owner.setdefault(entity, index)

    labels = [0] * len(reference)
    spans: List[MentionSpan] = []
    for entity, triplet_index in owner.items():
        width = len(tokenize(entity))
        for start in find_mentions(entity, reference):
            spans.append(MentionSpan(start, start + width, triplet_index))
            for position in range(start, start + width):
                labels[position] = 1

    spans.sort(key=lambda s: (s.start, s.end, s.triplet))
    return CopyLabelSequence(labels=tuple(labels), spans=tuple(spans))
