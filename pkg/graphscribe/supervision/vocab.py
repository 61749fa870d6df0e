"""
Vocabulary: bijective token <-> id lookup with reserved special tokens.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from graphscribe.data.types import HEAD_MARKER, PLACEHOLDER, RELATION_MARKER, TAIL_MARKER
from graphscribe.errors import VocabularyError

logger = logging.getLogger(__name__)

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

SPECIALS = (PAD, BOS, EOS, UNK, HEAD_MARKER, RELATION_MARKER, TAIL_MARKER, PLACEHOLDER)


class Vocabulary:
    """
    Token to id lookup.

    Special tokens always occupy the first ids in SPECIALS order. Unknown
    tokens map to ``<unk>``.
    """

    def __init__(self, tokens: Sequence[str]):
        itos = list(tokens)
        if tuple(itos[: len(SPECIALS)]) != SPECIALS:
            raise VocabularyError("Vocabulary must start with the special tokens")
        if len(set(itos)) != len(itos):
            raise VocabularyError("Vocabulary contains duplicate tokens")
        self._itos: List[str] = itos
        self._stoi: Dict[str, int] = {token: index for index, token in enumerate(itos)}

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, token: str) -> bool:
        return token in self._stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._itos == other._itos

    @property
    def pad_id(self) -> int:
        return self._stoi[PAD]

    @property
    def bos_id(self) -> int:
        return self._stoi[BOS]

    @property
    def eos_id(self) -> int:
        return self._stoi[EOS]

    @property
    def unk_id(self) -> int:
        return self._stoi[UNK]

    @property
    def special_ids(self) -> List[int]:
        return [self._stoi[token] for token in SPECIALS]

    def id_of(self, token: str) -> int:
        """Id of a token, ``<unk>`` when absent."""
        return self._stoi.get(token, self.unk_id)

    def token_of(self, index: int) -> str:
        return self._itos[index]

    def encode(self, tokens: Iterable[str]) -> List[int]:
        return [self.id_of(token) for token in tokens]

    def decode(self, ids: Iterable[int], strip_specials: bool = True) -> List[str]:
        tokens = []
        specials = set(self.special_ids) - {self.unk_id}
        for index in ids:
            if strip_specials and index in specials:
                continue
            tokens.append(self._itos[index])
        return tokens

    def tokens(self) -> List[str]:
        return list(self._itos)

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self._itos, ensure_ascii=False, indent=0), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "Vocabulary":
        try:
            tokens = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise VocabularyError(f"Cannot read vocabulary {path}: {e}") from e
        return cls(tokens)


def build_vocab(
    corpus: Iterable[Sequence[str]],
    min_count: int = 1,
    max_size: Optional[int] = None,
) -> Vocabulary:
    """
    Build a vocabulary from token sequences.

    Non-special tokens are ranked by frequency, ties broken lexicographically.
    Tokens seen fewer than ``min_count`` times are left out (they map to
    ``<unk>``). ``max_size`` counts the special tokens.
    """
    if max_size is not None and max_size < len(SPECIALS):
        raise VocabularyError(
            f"max_size {max_size} is smaller than the {len(SPECIALS)} special tokens"
        )

    counts: Counter = Counter()
    n_sequences = 0
    for sequence in corpus:
        counts.update(sequence)
        n_sequences += 1
    if n_sequences == 0:
        raise VocabularyError("Cannot build a vocabulary from an empty corpus")

    ranked = sorted(
        (token for token, count in counts.items() if count >= min_count and token not in SPECIALS),
        key=lambda token: (-counts[token], token),
    )
    if max_size is not None:
        ranked = ranked[: max_size - len(SPECIALS)]

    vocab = Vocabulary(list(SPECIALS) + ranked)
    logger.debug(f"Built vocabulary of {len(vocab)} tokens from {n_sequences} sequences")
    return vocab
