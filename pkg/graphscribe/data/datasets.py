"""
Dataset ingestion.

Three input formats are understood:

- ``jsonl``: one canonical record per line, ``{"id", "triples", "text", "pos"?}``
- ``webnlg-json``: the WebNLG JSON release (``entries`` of ``modifiedtripleset``
  plus ``lexicalisations``)
- ``dart-json``: the DART JSON release (``tripleset`` plus ``annotations``)

Graphs with several references become one example per reference. Records
that fail validation are collected in the report with their position rather
than silently dropped.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from graphscribe.data.graph import fit_graph
from graphscribe.data.types import Example, KnowledgeGraph, Triplet
from graphscribe.errors import DataError, RecordError

logger = logging.getLogger(__name__)


class DatasetFormat(str, Enum):
    """Supported dataset formats."""
    JSONL = "jsonl"
    WEBNLG = "webnlg-json"
    DART = "dart-json"


class RawRecord(BaseModel):
    """Canonical record schema."""
    model_config = ConfigDict(extra="ignore")

    id: Optional[str] = None
    triples: List[Tuple[str, str, str]] = Field(..., min_length=1)
    text: str
    pos: Optional[List[str]] = None

    @field_validator("text")
    @classmethod
    def text_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("text is empty")
        return value


@dataclass
class ParseReport:
    """
    Examples parsed from a dataset file, the records that were rejected and
    the count of lexicalisations the release itself marks as bad.
    """
    path: Path
    examples: List[Example] = field(default_factory=list)
    errors: List[RecordError] = field(default_factory=list)
    skipped: int = 0

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def ok(self) -> bool:
        return not self.errors


def clean_webnlg_term(term: str) -> str:
    """WebNLG spells entities with underscores and sometimes wraps literals in quotes."""
    return term.replace("_", " ").strip().strip('"').strip()


def parse_dataset(
    path: Path,
    format: DatasetFormat | str = DatasetFormat.JSONL,
    n_slots: Optional[int] = None,
    oversize: str = "reject",
) -> ParseReport:
    """
    Parse a dataset file into examples.

    Args:
        path: Dataset file
        format: One of DatasetFormat
        n_slots: When set, graphs larger than this are handled per ``oversize``
        oversize: "reject" records oversize graphs as errors, "truncate" keeps the first n_slots

    Returns:
        ParseReport with the valid examples and per-record errors
    """
    path = Path(path)
    format = DatasetFormat(format)
    if oversize not in ("reject", "truncate"):
        raise DataError(f"Unknown oversize policy '{oversize}'")

    try:
        content = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot read dataset {path}: {e}") from e

    report = ParseReport(path=path)
    if format is DatasetFormat.JSONL:
        records = _jsonl_records(content, path, report)
    elif format is DatasetFormat.WEBNLG:
        records = _webnlg_records(_load_json(content, path), path, report)
    else:
        records = _dart_records(_load_json(content, path), path)

    for line, raw in records:
        try:
            record = RawRecord.model_validate(raw)
            example_id = record.id or f"{path.stem}-{line}"
            graph = KnowledgeGraph(tuple(Triplet(*t) for t in record.triples), id=example_id)
            if n_slots is not None:
                graph = fit_graph(graph, n_slots, oversize)
            report.examples.append(
                Example(
                    graph=graph,
                    reference=record.text,
                    pos_reference=tuple(record.pos) if record.pos is not None else None,
                )
            )
        except ValidationError as e:
            report.errors.append(RecordError(_summarize(e), line=line, path=path))
        except DataError as e:
            report.errors.append(RecordError(str(e), line=line, path=path))

    if report.errors:
        logger.warning(f"{path}: {len(report.errors)} malformed records skipped")
    if report.skipped:
        logger.info(f"{path}: {report.skipped} lexicalisations marked bad were skipped")
    logger.info(f"Parsed {len(report.examples)} examples from {path}")
    return report


class GraphRecord(BaseModel):
    """A graph without a reference, as fed to generation."""
    model_config = ConfigDict(extra="ignore")

    id: Optional[str] = None
    triples: List[Tuple[str, str, str]] = Field(..., min_length=1)


def parse_graphs(path: Path, n_slots: Optional[int] = None, oversize: str = "reject") -> List[KnowledgeGraph]:
    """
    Read graphs from JSONL (``{"id", "triples"}`` per line; other keys ignored).

    Raises:
        RecordError: On the first malformed line
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataError(f"Cannot read graphs from {path}: {e}") from e

    graphs = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = GraphRecord.model_validate(json.loads(line))
            graph = KnowledgeGraph(
                tuple(Triplet(*t) for t in record.triples), id=record.id or f"{path.stem}-{line_number}"
            )
        except json.JSONDecodeError as e:
            raise RecordError(f"invalid JSON: {e.msg}", line=line_number, path=path) from e
        except ValidationError as e:
            raise RecordError(_summarize(e), line=line_number, path=path) from e
        except DataError as e:
            raise RecordError(str(e), line=line_number, path=path) from e
        graphs.append(fit_graph(graph, n_slots, oversize) if n_slots is not None else graph)
    if not graphs:
        raise DataError(f"{path} contains no graphs")
    return graphs


def convert_dataset(path: Path, format: DatasetFormat | str, output: Path) -> ParseReport:
    """Convert a WebNLG/DART release into canonical JSONL."""
    report = parse_dataset(path, format)
    write_jsonl(report.examples, output)
    return report


def write_jsonl(examples: List[Example], output: Path):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as f:
        for example in examples:
            record: Dict[str, Any] = {
                "id": example.id,
                "triples": [list(t.as_tuple()) for t in example.graph.triplets],
                "text": example.reference,
            }
            if example.pos_reference is not None:
                record["pos"] = list(example.pos_reference)
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def _load_json(content: str, path: Path) -> Any:
    try:
        return json.loads(content)
    except json.JSONDecodeError as e:
        raise DataError(f"{path} is not valid JSON: {e}") from e


def _jsonl_records(content: str, path: Path, report: ParseReport) -> Iterator[Tuple[int, Any]]:
    for line_number, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield line_number, json.loads(line)
        except json.JSONDecodeError as e:
            report.errors.append(RecordError(f"invalid JSON: {e.msg}", line=line_number, path=path))


def _webnlg_records(data: Any, path: Path, report: ParseReport) -> Iterator[Tuple[int, Dict[str, Any]]]:
    if not isinstance(data, dict) or "entries" not in data:
        raise DataError(f"{path} is not a WebNLG JSON release (no 'entries')")

    index = 0
    for wrapper in data["entries"]:
        for eid, entry in wrapper.items():
            triples = [
                [clean_webnlg_term(t.get("subject", "")), t.get("property", ""),
                 clean_webnlg_term(t.get("object", ""))]
                for t in entry.get("modifiedtripleset", [])
            ]
            for j, lex in enumerate(entry.get("lexicalisations", [])):
                index += 1
                if lex.get("comment") == "bad":
                    report.skipped += 1
                    logger.debug(f"{path}: skipping lexicalisation {eid}-{j} marked bad")
                    continue
                yield index, {"id": f"{eid}-{j}", "triples": triples, "text": lex.get("lex", "")}


def _dart_records(data: Any, path: Path) -> Iterator[Tuple[int, Dict[str, Any]]]:
    if not isinstance(data, list):
        raise DataError(f"{path} is not a DART JSON release (expected a list)")

    index = 0
    for i, entry in enumerate(data):
        triples = [
            [clean_webnlg_term(str(part)) for part in t] for t in entry.get("tripleset", [])
        ]
        for j, annotation in enumerate(entry.get("annotations", [])):
            index += 1
            yield index, {"id": f"dart-{i}-{j}", "triples": triples, "text": annotation.get("text", "")}


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"])
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)
