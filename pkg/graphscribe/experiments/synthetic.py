"""
Synthetic corpora with planted, copyable entity names.

Graphs are stars around one head entity. Relations come from a small fixed
inventory with fixed English phrasing; entity names are invented words that
never collide with each other or with the phrasing, so every entity token in
a reference can only be produced by copying.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from graphscribe.data.tokenizer import tokenize
from graphscribe.data.types import Example, KnowledgeGraph, Triplet

logger = logging.getLogger(__name__)

# (relation surface, clause template); order doubles as the description
# priority used by feature_ordered_graphs
RELATIONS: Tuple[Tuple[str, str], ...] = (
    ("birth place", "{h} was born in {t}"),
    ("country", "{h} is located in {t}"),
    ("capital", "{h} has its capital in {t}"),
    ("leader", "{h} is led by {t}"),
    ("founder", "{h} was founded by {t}"),
    ("language", "{h} speaks {t}"),
    ("currency", "{h} pays with {t}"),
    ("architect", "{h} was designed by {t}"),
    ("club", "{h} plays for {t}"),
    ("genre", "{h} is known for {t} music"),
)

SYLLABLES = (
    "ka", "lo", "ve", "ru", "da", "mi", "to", "ne", "sa", "ri",
    "po", "zu", "fe", "gi", "bo", "xa", "ly", "qu", "we", "jo",
)


def _phrase_words() -> set:
    words = {"and"}
    for surface, template in RELATIONS:
        words.update(tokenize(surface))
        words.update(tokenize(template.format(h="", t="")))
    return words


def entity_pool(size: int, seed: int = 0) -> List[str]:
    """
    ``size`` distinct entity names. No word is shared between two names or
    with the relation phrasing, so entity mentions never overlap.
    """
    rng = np.random.default_rng(seed)
    reserved = _phrase_words()
    used: set = set()
    names: List[str] = []
    attempts = 0
    while len(names) < size:
        attempts += 1
        if attempts > size * 200:
            raise ValueError(f"Cannot draw {size} distinct entity names")
        n_words = 2 if rng.random() < 0.3 else 1
        words = []
        for _ in range(n_words):
            n_syllables = int(rng.integers(2, 4))
            words.append("".join(SYLLABLES[int(i)] for i in rng.integers(0, len(SYLLABLES), n_syllables)))
        if any(w in used or w in reserved for w in words) or len(set(words)) != len(words):
            continue
        used.update(words)
        names.append(" ".join(w.capitalize() for w in words))
    return names


def realise(head: str, clauses: Sequence[Tuple[str, str]]) -> str:
    """Join (template, tail) clauses about ``head`` into one sentence."""
    parts = [template.format(h=head, t=tail) for template, tail in clauses]
    if len(parts) == 1:
        body = parts[0]
    elif len(parts) == 2:
        body = f"{parts[0]} and {parts[1]}"
    else:
        body = ", ".join(parts[:-1]) + f", and {parts[-1]}"
    return body + "."


def _star_example(
    example_id: str,
    head: str,
    tails: Sequence[str],
    relation_ids: Sequence[int],
    description: Sequence[int],
) -> Example:
    """
    Args:
        relation_ids: Relation of each triplet, in description order
        description: Input slot of each described triplet
    """
    n = len(relation_ids)
    triplets: List[Triplet] = [None] * n  # type: ignore[list-item]
    for rank, slot in enumerate(description):
        surface, _ = RELATIONS[relation_ids[rank]]
        triplets[slot] = Triplet(head, surface, tails[rank])
    clauses = [(RELATIONS[relation_ids[rank]][1], tails[rank]) for rank in range(n)]
    return Example(graph=KnowledgeGraph(tuple(triplets), id=example_id), reference=realise(head, clauses))


def synthetic_corpus(
    n_examples: int,
    seed: int = 0,
    max_triplets: int = 4,
    entity_pool_size: int = 500,
) -> List[Example]:
    """
    Star graphs of 1 to ``max_triplets`` triplets; the reference describes
    them in a random order while the graph lists them in another.
    """
    if not 1 <= max_triplets <= len(RELATIONS):
        raise ValueError(f"max_triplets must be between 1 and {len(RELATIONS)}")
    if entity_pool_size < max_triplets + 1:
        raise ValueError("Entity pool is smaller than one graph")
    rng = np.random.default_rng(seed)
    pool = entity_pool(entity_pool_size, seed)

    examples = []
    for i in range(n_examples):
        n = int(rng.integers(1, max_triplets + 1))
        entities = [pool[int(j)] for j in rng.choice(len(pool), size=n + 1, replace=False)]
        relation_ids = [int(r) for r in rng.choice(len(RELATIONS), size=n, replace=False)]
        description = [int(s) for s in rng.permutation(n)]
        examples.append(
            _star_example(f"synth-{seed}-{i}", entities[0], entities[1:], relation_ids, description)
        )
    logger.debug(f"Generated {len(examples)} synthetic examples (seed {seed})")
    return examples


def feature_ordered_graphs(n_graphs: int, seed: int = 0, max_triplets: int = 4) -> List[Example]:
    """
    Examples whose description order is fixed by the relations: triplets are
    always described in RELATIONS order, whatever their input order.
    """
    rng = np.random.default_rng(seed)
    pool = entity_pool(max(50, n_graphs * 2), seed + 1)

    examples = []
    for i in range(n_graphs):
        n = int(rng.integers(2, max_triplets + 1))
        entities = [pool[int(j)] for j in rng.choice(len(pool), size=n + 1, replace=False)]
        relation_ids = sorted(int(r) for r in rng.choice(len(RELATIONS), size=n, replace=False))
        description = [int(s) for s in rng.permutation(n)]
        examples.append(
            _star_example(f"ordered-{seed}-{i}", entities[0], entities[1:], relation_ids, description)
        )
    return examples


def split_corpus(examples: Sequence[Example], fractions: Tuple[float, float] = (0.8, 0.1)) -> Dict[str, List[Example]]:
    """Deterministic train / validation / test split by position."""
    n = len(examples)
    n_train = int(round(n * fractions[0]))
    n_val = int(round(n * fractions[1]))
    return {
        "train": list(examples[:n_train]),
        "validation": list(examples[n_train:n_train + n_val]),
        "test": list(examples[n_train + n_val:]),
    }
