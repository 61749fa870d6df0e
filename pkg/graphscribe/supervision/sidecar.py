"""
Supervision sidecar files.

A sidecar is JSON-lines: one header record, then one record per example with
the tokenized reference, the order ranks, the 0-1 copy labels and the POS tag
ids. Keys are written sorted so that unchanged inputs give byte-identical
files.

Header::

    {"format": "graphscribe-supervision", "version": 1, "n_slots": 8,
     "tagger": "lexicon", "tagset": {"name": "coarse", "tags": [...]}, "count": 1}
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError

from graphscribe.data.types import Example, KnowledgeGraph, OrderLabel, Triplet
from graphscribe.errors import DataError, RecordError
from graphscribe.supervision.copy_labels import generate_copy_labels
from graphscribe.supervision.order import extract_gt_order
from graphscribe.supervision.tagging import COARSE, POSSequence, Tagger, Tagset, tag_pos

logger = logging.getLogger(__name__)

SIDECAR_FORMAT = "graphscribe-supervision"
SIDECAR_VERSION = 1


class SupervisionRecord(BaseModel):
    """Labels for one (graph, reference) example."""
    id: str
    triples: List[Tuple[str, str, str]]
    text: str
    tokens: List[str]
    order: List[int]
    copy_labels: List[int]
    pos: List[int]

    @property
    def graph(self) -> KnowledgeGraph:
        return KnowledgeGraph(tuple(Triplet(*t) for t in self.triples), id=self.id)

    @property
    def order_label(self) -> OrderLabel:
        return OrderLabel(tuple(self.order))

    @property
    def pos_sequence(self) -> POSSequence:
        return POSSequence(tuple(self.pos))

    def example(self) -> Example:
        return Example(graph=self.graph, reference=self.text)


class SidecarHeader(BaseModel):
    format: str = SIDECAR_FORMAT
    version: int = SIDECAR_VERSION
    n_slots: int
    tagger: str
    tagset: Dict[str, Any]
    count: int = 0

    @property
    def tagset_obj(self) -> Tagset:
        return Tagset.from_dict(self.tagset)


@dataclass
class Sidecar:
    header: SidecarHeader
    records: List[SupervisionRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def build_supervision(
    example: Example,
    n_slots: int,
    tagger: Union[str, Tagger] = "lexicon",
    tagset: Tagset = COARSE,
) -> SupervisionRecord:
    """Extract order, copy labels and POS tags for one example."""
    tokens = example.tokens
    order = extract_gt_order(example.graph, tokens, n_slots)
    labels = generate_copy_labels(example.graph, tokens)
    pos = tag_pos(tokens, tagger, tagset, pre_tagged=example.pos_reference)
    return SupervisionRecord(
        id=example.id,
        triples=[t.as_tuple() for t in example.graph.triplets],
        text=example.reference,
        tokens=tokens,
        order=list(order.ranks),
        copy_labels=list(labels.labels),
        pos=list(pos.tags),
    )


def write_sidecar(
    records: List[SupervisionRecord],
    path: Path,
    n_slots: int,
    tagger: str = "lexicon",
    tagset: Tagset = COARSE,
):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = SidecarHeader(n_slots=n_slots, tagger=tagger, tagset=tagset.to_dict(), count=len(records))
    with open(path, "w", encoding="utf-8") as f:
        f.write(_dumps(header.model_dump()) + "\n")
        for record in records:
            f.write(_dumps(record.model_dump()) + "\n")
    logger.info(f"Wrote {len(records)} supervision records to {path}")


def read_sidecar(path: Path) -> Sidecar:
    """Read a sidecar, checking its format and version."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataError(f"Cannot read sidecar {path}: {e}") from e
    if not lines:
        raise DataError(f"Sidecar {path} is empty")

    try:
        header = SidecarHeader.model_validate(json.loads(lines[0]))
    except (json.JSONDecodeError, ValidationError) as e:
        raise DataError(f"Sidecar {path} has no valid header: {e}") from e
    if header.format != SIDECAR_FORMAT:
        raise DataError(f"{path} is not a supervision sidecar (format '{header.format}')")
    if header.version != SIDECAR_VERSION:
        raise DataError(
            f"Sidecar {path} has version {header.version}, expected {SIDECAR_VERSION}"
        )

    sidecar = Sidecar(header=header)
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            sidecar.records.append(SupervisionRecord.model_validate(json.loads(line)))
        except (json.JSONDecodeError, ValidationError) as e:
            raise RecordError(str(e), line=line_number, path=path) from e
    return sidecar


@dataclass
class SupervisionSummary:
    """Corpus statistics printed after preprocessing."""
    count: int
    order_lengths: Dict[int, int]
    copy_rate: float
    tag_distribution: Dict[str, float]


def summarize(records: Iterable[SupervisionRecord], tagset: Optional[Tagset] = None) -> SupervisionSummary:
    tagset = tagset or COARSE
    lengths: Counter = Counter()
    tags: Counter = Counter()
    copied = 0
    total = 0
    count = 0
    for record in records:
        count += 1
        lengths[len(record.triples)] += 1
        copied += sum(record.copy_labels)
        total += len(record.copy_labels)
        tags.update(tagset.tag_of(i) for i in record.pos)
    n_tags = sum(tags.values())
    return SupervisionSummary(
        count=count,
        order_lengths=dict(sorted(lengths.items())),
        copy_rate=copied / total if total else 0.0,
        tag_distribution={tag: n / n_tags for tag, n in tags.most_common()} if n_tags else {},
    )


def _dumps(data: dict) -> str:
    return json.dumps(data, ensure_ascii=False, sort_keys=True)


def is_sidecar(path: Path) -> bool:
    """True when the first line of ``path`` is a supervision sidecar header."""
    try:
        with open(path, encoding="utf-8") as f:
            first = f.readline()
        data = json.loads(first)
    except (OSError, json.JSONDecodeError):
        return False
    return isinstance(data, dict) and data.get("format") == SIDECAR_FORMAT
