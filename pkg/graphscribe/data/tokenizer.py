"""
Word-level tokenizer shared by supervision, linearization and metrics.

Tokens are runs of word characters or single punctuation marks. Every token
remembers whether whitespace preceded it so that surface strings can be
rebuilt exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Sequence, Union

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class Token:
    """A token and whether whitespace came before it."""
    text: str
    space_before: bool = True


def normalize_whitespace(text: str) -> str:
    """Collapse runs of whitespace into single spaces and strip the ends."""
    return " ".join(text.split())


def tokenize_with_spacing(text: str, lower: bool = False) -> List[Token]:
    """Tokenize text, keeping case unless asked otherwise."""
    tokens = []
    previous_end = 0
    for match in _TOKEN_RE.finditer(text):
        piece = match.group(0)
        tokens.append(Token(piece.lower() if lower else piece, match.start() > previous_end))
        previous_end = match.end()
    return tokens


def tokenize(text: str, lower: bool = True) -> List[str]:
    """Tokenize text into lowercase word and punctuation tokens."""
    return [token.text for token in tokenize_with_spacing(text, lower=lower)]


def detokenize(tokens: Sequence[Union[Token, str]]) -> str:
    """
    Rebuild a string from tokens.

    Plain strings are joined with single spaces; Token objects honour their
    spacing flag (the first token never gets leading whitespace).
    """
    parts: List[str] = []
    for index, token in enumerate(tokens):
        if isinstance(token, Token):
            if index > 0 and token.space_before:
                parts.append(" ")
            parts.append(token.text)
        else:
            if index > 0:
                parts.append(" ")
            parts.append(token)
    return "".join(parts)
