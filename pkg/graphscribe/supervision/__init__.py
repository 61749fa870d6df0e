"""
Training labels derived from references: description order, copy labels,
POS tags, and the vocabulary.
"""

from graphscribe.supervision.copy_labels import CopyLabelSequence, MentionSpan, generate_copy_labels
from graphscribe.supervision.order import extract_gt_order, find_mentions
from graphscribe.supervision.sidecar import (
    Sidecar,
    SupervisionRecord,
    build_supervision,
    is_sidecar,
    read_sidecar,
    summarize,
    write_sidecar,
)
from graphscribe.supervision.tagging import (
    COARSE,
    LexiconTagger,
    POSSequence,
    Tagset,
    get_tagger,
    register_tagger,
    tag_pos,
)
from graphscribe.supervision.vocab import Vocabulary, build_vocab

__all__ = [
    "CopyLabelSequence",
    "MentionSpan",
    "generate_copy_labels",
    "extract_gt_order",
    "find_mentions",
    "Sidecar",
    "SupervisionRecord",
    "build_supervision",
    "is_sidecar",
    "read_sidecar",
    "summarize",
    "write_sidecar",
    "COARSE",
    "LexiconTagger",
    "POSSequence",
    "Tagset",
    "get_tagger",
    "register_tagger",
    "tag_pos",
    "Vocabulary",
    "build_vocab",
]
