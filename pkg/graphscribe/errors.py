"""
Exception hierarchy for graphscribe.

Every error raised on purpose by the package derives from GraphscribeError so
the CLI can map families of failures to exit codes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional


class GraphscribeError(Exception):
    """Base class for all graphscribe errors."""
    pass


class ConfigError(GraphscribeError):
    """Raised when a configuration file or flag combination is invalid."""
    pass


class DataError(GraphscribeError):
    """Raised when input data cannot be used."""
    pass


class RecordError(DataError):
    """A single malformed dataset record."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[Path] = None):
        self.message = message
        self.line = line
        self.path = path
        where = f"{path}:{line}" if path is not None and line is not None else f"line {line}"
        super().__init__(f"{where}: {message}" if line is not None else message)


class OversizeGraphError(DataError):
    """Raised when a graph has more triplets than the fixed slot count."""

    def __init__(self, example_id: str, n_triplets: int, n_slots: int):
        self.example_id = example_id
        self.n_triplets = n_triplets
        self.n_slots = n_slots
        super().__init__(
            f"Graph '{example_id}' has {n_triplets} triplets, more than the {n_slots} slots allowed"
        )


class InvalidOrderError(DataError):
    """Raised when an order label is not a permutation over the real triplets."""
    pass


class VocabularyError(GraphscribeError):
    """Raised when a vocabulary cannot be built or loaded."""
    pass


class UnknownTaggerError(GraphscribeError):
    """Raised when a POS tagger id is not registered."""
    pass


class CheckpointError(GraphscribeError):
    """Raised when a checkpoint is incompatible or corrupted."""
    pass


class NumericError(GraphscribeError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, message: str, dump_path: Optional[Path] = None):
        self.dump_path = dump_path
        if dump_path is not None:
            message = f"{message} (diagnostics written to {dump_path})"
        super().__init__(message)
