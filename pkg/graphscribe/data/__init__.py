"""
Knowledge-graph data model, dataset ingestion, padding and linearization.
"""

from graphscribe.data.datasets import (
    DatasetFormat,
    GraphRecord,
    ParseReport,
    RawRecord,
    convert_dataset,
    parse_dataset,
    parse_graphs,
    write_jsonl,
)
from graphscribe.data.graph import check_order, fit_graph, linearize, linearized_tokens, pad_graph
from graphscribe.data.tokenizer import Token, detokenize, tokenize, tokenize_with_spacing
from graphscribe.data.types import (
    HEAD_MARKER,
    MARKER_PROVENANCE,
    MARKERS,
    PAD_CLASS,
    PAD_PROVENANCE,
    PLACEHOLDER,
    PLACEHOLDER_TRIPLET,
    RELATION_MARKER,
    TAIL_MARKER,
    Example,
    KnowledgeGraph,
    LinearizedKG,
    OrderLabel,
    PaddedGraph,
    Triplet,
)

__all__ = [
    "DatasetFormat",
    "GraphRecord",
    "ParseReport",
    "RawRecord",
    "convert_dataset",
    "parse_dataset",
    "parse_graphs",
    "write_jsonl",
    "check_order",
    "fit_graph",
    "linearize",
    "linearized_tokens",
    "pad_graph",
    "Token",
    "detokenize",
    "tokenize",
    "tokenize_with_spacing",
    "HEAD_MARKER",
    "MARKER_PROVENANCE",
    "MARKERS",
    "PAD_CLASS",
    "PAD_PROVENANCE",
    "PLACEHOLDER",
    "PLACEHOLDER_TRIPLET",
    "RELATION_MARKER",
    "TAIL_MARKER",
    "Example",
    "KnowledgeGraph",
    "LinearizedKG",
    "OrderLabel",
    "PaddedGraph",
    "Triplet",
]
