"""
Core data model: triplets, graphs, examples, padded graphs, orders and
linearized graphs.

All types are frozen dataclasses; constructors normalize and validate their
fields so that an instance in hand always satisfies its invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

from graphscribe.data.tokenizer import Token, detokenize, normalize_whitespace, tokenize
from graphscribe.errors import DataError, InvalidOrderError

PLACEHOLDER = "<placeholder>"
HEAD_MARKER = "<Head>"
RELATION_MARKER = "<Relation>"
TAIL_MARKER = "<Tail>"
MARKERS = (HEAD_MARKER, RELATION_MARKER, TAIL_MARKER)

# Rank value stored for placeholder slots; doubles as the loss ignore index.
PAD_CLASS = -100

# Provenance values for linearized tokens that do not belong to a triplet.
MARKER_PROVENANCE = -1
PAD_PROVENANCE = -2


@dataclass(frozen=True)
class Triplet:
    """A (head, relation, tail) fact with whitespace-normalized surface strings."""
    head: str
    relation: str
    tail: str

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise DataError(f"Triplet {name} must be a string, got {type(value).__name__}")
            value = normalize_whitespace(value)
            if not value:
                raise DataError(f"Triplet {name} is empty")
            object.__setattr__(self, name, value)

    @property
    def is_placeholder(self) -> bool:
        return self.head == PLACEHOLDER and self.relation == PLACEHOLDER and self.tail == PLACEHOLDER

    def entities(self) -> Tuple[str, str]:
        return (self.head, self.tail)

    def as_tuple(self) -> Tuple[str, str, str]:
        return (self.head, self.relation, self.tail)


PLACEHOLDER_TRIPLET = Triplet(PLACEHOLDER, PLACEHOLDER, PLACEHOLDER)


@dataclass(frozen=True)
class KnowledgeGraph:
    """An ordered, non-empty collection of triplets."""
    triplets: Tuple[Triplet, ...]
    id: str = ""

    def __post_init__(self):
        triplets = tuple(
            t if isinstance(t, Triplet) else Triplet(*t) for t in self.triplets
        )
        if not triplets:
            raise DataError(f"Knowledge graph '{self.id}' has no triplets")
        object.__setattr__(self, "triplets", triplets)

    def __len__(self) -> int:
        return len(self.triplets)

    def __iter__(self) -> Iterator[Triplet]:
        return iter(self.triplets)

    def entities(self) -> List[str]:
        """Distinct head and tail strings in first-seen order."""
        seen = {}
        for triplet in self.triplets:
            for entity in triplet.entities():
                seen.setdefault(entity, None)
        return list(seen)

    def truncated(self, n_slots: int) -> "KnowledgeGraph":
        return KnowledgeGraph(self.triplets[:n_slots], id=self.id)


@dataclass(frozen=True)
class Example:
    """A graph paired with one reference sentence."""
    graph: KnowledgeGraph
    reference: str
    pos_reference: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        reference = normalize_whitespace(self.reference or "")
        if not reference:
            raise DataError(f"Example '{self.graph.id}' has an empty reference")
        object.__setattr__(self, "reference", reference)

        if self.pos_reference is not None:
            tags = tuple(self.pos_reference)
            n_tokens = len(tokenize(reference))
            if len(tags) != n_tokens:
                raise DataError(
                    f"Example '{self.graph.id}' has {len(tags)} POS tags for {n_tokens} tokens"
                )
            object.__setattr__(self, "pos_reference", tags)

    @property
    def id(self) -> str:
        return self.graph.id

    @property
    def tokens(self) -> List[str]:
        return tokenize(self.reference)


@dataclass(frozen=True)
class PaddedGraph:
    """A graph padded with placeholder triplets to exactly N slots."""
    triplets: Tuple[Triplet, ...]
    mask: Tuple[bool, ...]
    n_real: int

    def __post_init__(self):
        if len(self.triplets) != len(self.mask):
            raise DataError("Padded graph mask length differs from slot count")
        expected = tuple([True] * self.n_real + [False] * (len(self.mask) - self.n_real))
        if tuple(self.mask) != expected:
            raise DataError("Padded graph mask must have all real slots before placeholders")
        if any(not t.is_placeholder for t in self.triplets[self.n_real:]):
            raise DataError("Padded graph slots after the real triplets must be placeholders")

    @property
    def n_slots(self) -> int:
        return len(self.triplets)

    def real_triplets(self) -> Tuple[Triplet, ...]:
        return self.triplets[: self.n_real]


@dataclass(frozen=True)
class OrderLabel:
    """
    Description order of a graph's triplets.

    ``ranks[i]`` is the description position of the triplet in input slot
    ``i`` (PAD_CLASS for placeholder slots). ``listing()`` gives the inverse
    view: the slot described first, second, and so on. For the AWH example the
    ranks are (1, 2, 0) and the listing is (2, 0, 1).
    """
    ranks: Tuple[int, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        real = sorted(r for r in ranks if r != PAD_CLASS)
        if real != list(range(len(real))):
            raise InvalidOrderError(f"Order ranks {ranks} are not a permutation")
        object.__setattr__(self, "ranks", ranks)

    @property
    def n_slots(self) -> int:
        return len(self.ranks)

    @property
    def n_real(self) -> int:
        return sum(1 for r in self.ranks if r != PAD_CLASS)

    def listing(self) -> Tuple[int, ...]:
        """Slot index for each description position."""
        listing = [0] * self.n_real
        for slot, rank in enumerate(self.ranks):
            if rank != PAD_CLASS:
                listing[rank] = slot
        return tuple(listing)

    def padded(self, n_slots: int) -> "OrderLabel":
        if n_slots < len(self.ranks):
            raise InvalidOrderError(f"Cannot pad an order of {len(self.ranks)} slots to {n_slots}")
        return OrderLabel(self.ranks + (PAD_CLASS,) * (n_slots - len(self.ranks)))

    def resized(self, n_slots: int) -> "OrderLabel":
        """Pad with, or drop trailing, placeholder slots to reach ``n_slots``."""
        if n_slots >= len(self.ranks):
            return self.padded(n_slots)
        if any(r != PAD_CLASS for r in self.ranks[n_slots:]):
            raise InvalidOrderError(f"Cannot shrink an order over {self.n_real} triplets to {n_slots} slots")
        return OrderLabel(self.ranks[:n_slots])

    @classmethod
    def from_listing(cls, listing: Sequence[int], n_slots: Optional[int] = None) -> "OrderLabel":
        n_real = len(listing)
        if sorted(listing) != list(range(n_real)):
            raise InvalidOrderError(f"Order listing {tuple(listing)} is not a permutation")
        ranks = [PAD_CLASS] * (n_slots or n_real)
        for rank, slot in enumerate(listing):
            ranks[slot] = rank
        return cls(tuple(ranks))

    @classmethod
    def identity(cls, n_real: int, n_slots: Optional[int] = None) -> "OrderLabel":
        return cls.from_listing(list(range(n_real)), n_slots)

    def __str__(self) -> str:
        return ",".join(str(slot) for slot in self.listing())


@dataclass(frozen=True)
class LinearizedKG:
    """
    Marker-delimited token sequence of a graph.

    ``provenance[i]`` is the input slot of the triplet token ``i`` came from,
    MARKER_PROVENANCE for marker tokens.
    """
    ids: Tuple[int, ...]
    surface: Tuple[str, ...]
    spacing: Tuple[bool, ...]
    provenance: Tuple[int, ...]
    order_used: OrderLabel = field(default_factory=lambda: OrderLabel(()))

    def __post_init__(self):
        lengths = {len(self.ids), len(self.surface), len(self.spacing), len(self.provenance)}
        if len(lengths) != 1:
            raise DataError("Linearized graph fields have different lengths")

    def __len__(self) -> int:
        return len(self.ids)

    def copyable_positions(self) -> List[int]:
        return [i for i, slot in enumerate(self.provenance) if slot >= 0]

    def segments(self) -> List[Tuple[int, Triplet]]:
        """Split on marker tokens and rebuild (slot, triplet) pairs in linearized order."""
        segments: List[Tuple[int, Triplet]] = []
        fields: dict = {}
        current: Optional[str] = None
        slot = MARKER_PROVENANCE

        def flush():
            if current is not None:
                triplet = Triplet(
                    detokenize(fields.get(HEAD_MARKER, [])),
                    detokenize(fields.get(RELATION_MARKER, [])),
                    detokenize(fields.get(TAIL_MARKER, [])),
                )
                segments.append((slot, triplet))

        for surface, space, prov in zip(self.surface, self.spacing, self.provenance):
            if prov == MARKER_PROVENANCE and surface in MARKERS:
                if surface == HEAD_MARKER:
                    flush()
                    fields = {}
                current = surface
                fields.setdefault(surface, [])
                continue
            if prov < 0 or current is None:
                continue
            slot = prov
            fields[current].append(Token(surface, space))
        flush()
        return segments
