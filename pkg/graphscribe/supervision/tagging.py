"""
Part-of-speech supervision.

Tags come from a registered tagger (the built-in ``lexicon`` tagger by
default) or from a pre-tagged dataset field. Either way they are collapsed to
a coarse 12-tag inventory.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple, Union

from graphscribe.errors import DataError, UnknownTaggerError

logger = logging.getLogger(__name__)

COARSE_TAGS = (
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
    "ADP", "NUM", "CONJ", "PRT", "PUNCT", "X",
)
TAG_PAD = "<pad>"
TAG_BOS = "<bos>"
TAG_EOS = "<eos>"
NOUN_CLASS = frozenset({"NOUN", "NUM"})

PENN_TO_COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB",
    "VBP": "VERB", "VBZ": "VERB", "MD": "VERB",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
    "PRP": "PRON", "PRP$": "PRON", "WP": "PRON", "WP$": "PRON", "EX": "PRON",
    "DT": "DET", "PDT": "DET", "WDT": "DET",
    "IN": "ADP",
    "CD": "NUM",
    "CC": "CONJ",
    "RP": "PRT", "TO": "PRT", "POS": "PRT",
    ".": "PUNCT", ",": "PUNCT", ":": "PUNCT", "``": "PUNCT", "''": "PUNCT",
    "-LRB-": "PUNCT", "-RRB-": "PUNCT", "#": "PUNCT", "$": "PUNCT",
    "FW": "X", "LS": "X", "SYM": "X", "UH": "X",
}


class Tagset:
    """Tag inventory with the decoder specials first."""

    def __init__(self, name: str, tags: Sequence[str]):
        self.name = name
        self._itos: List[str] = [TAG_PAD, TAG_BOS, TAG_EOS] + [t for t in tags]
        if len(set(self._itos)) != len(self._itos):
            raise DataError(f"Tagset '{name}' has duplicate tags")
        self._stoi: Dict[str, int] = {tag: i for i, tag in enumerate(self._itos)}

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, tag: str) -> bool:
        return tag in self._stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Tagset) and self.name == other.name and self._itos == other._itos

    @property
    def pad_id(self) -> int:
        return self._stoi[TAG_PAD]

    @property
    def bos_id(self) -> int:
        return self._stoi[TAG_BOS]

    @property
    def eos_id(self) -> int:
        return self._stoi[TAG_EOS]

    def id_of(self, tag: str) -> int:
        try:
            return self._stoi[tag]
        except KeyError:
            raise DataError(f"Tag '{tag}' is not in tagset '{self.name}'") from None

    def tag_of(self, index: int) -> str:
        return self._itos[index]

    def tags(self) -> List[str]:
        return list(self._itos)

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "tags": self._itos[3:]}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Tagset":
        return cls(str(data["name"]), list(data["tags"]))

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "Tagset":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


COARSE = Tagset("coarse", COARSE_TAGS)


@dataclass(frozen=True)
class POSSequence:
    """Tag ids, one per reference token."""
    tags: Tuple[int, ...]
    tagset: str = COARSE.name

    def __len__(self) -> int:
        return len(self.tags)

    def names(self, tagset: Tagset = COARSE) -> List[str]:
        return [tagset.tag_of(i) for i in self.tags]


class Tagger(Protocol):
    def tag(self, tokens: Sequence[str]) -> List[str]:
        ...


_NUMBER_RE = re.compile(r"^\d+([.,]\d+)*$")
_PUNCT_RE = re.compile(r"^[^\w\s]+$")


class LexiconTagger:
    """
    Closed-class lexicon plus suffix rules.

    Open-class words not covered by a suffix rule are tagged NOUN.
    """

    LEXICON: Dict[str, str] = {
        **dict.fromkeys(
            "the a an this that these those every each some any no all both another".split(), "DET"
        ),
        **dict.fromkeys(
            "i you he she it we they me him her us them his its their our my your "
            "who whom whose which what itself themselves".split(),
            "PRON",
        ),
        **dict.fromkeys(
            "in on at of for with by from into onto over under about after before between "
            "through during since near as against within without across along among "
            "around behind below above beside upon via than".split(),
            "ADP",
        ),
        **dict.fromkeys("and or but nor yet while whereas although because".split(), "CONJ"),
        **dict.fromkeys("to 's up off out".split(), "PRT"),
        **dict.fromkeys(
            "is are was were be been being am has have had do does did will would can "
            "could may might shall should must".split(),
            "VERB",
        ),
        **dict.fromkeys(
            "also very well there here then now not too often still already only "
            "currently formerly".split(),
            "ADV",
        ),
        **dict.fromkeys(
            "one two three four five six seven eight nine ten hundred thousand million "
            "billion".split(),
            "NUM",
        ),
        **dict.fromkeys(
            "large small new old good bad many such other own same main high low "
            "first last".split(),
            "ADJ",
        ),
    }

    SUFFIXES: Tuple[Tuple[str, str], ...] = (
        ("ly", "ADV"),
        ("ing", "VERB"),
        ("ed", "VERB"),
        ("ous", "ADJ"),
        ("ful", "ADJ"),
        ("ive", "ADJ"),
        ("able", "ADJ"),
        ("less", "ADJ"),
        ("ic", "ADJ"),
        ("al", "ADJ"),
        ("tion", "NOUN"),
        ("ment", "NOUN"),
        ("ness", "NOUN"),
    )

    def tag(self, tokens: Sequence[str]) -> List[str]:
        return [self._tag_one(token.lower()) for token in tokens]

    def _tag_one(self, token: str) -> str:
        if _NUMBER_RE.match(token):
            return "NUM"
        if _PUNCT_RE.match(token):
            return "PUNCT"
        if token in self.LEXICON:
            return self.LEXICON[token]
        for suffix, tag in self.SUFFIXES:
            if len(token) > len(suffix) + 2 and token.endswith(suffix):
                return tag
        return "NOUN"


_TAGGERS: Dict[str, Callable[[], Tagger]] = {
    "lexicon": LexiconTagger,
}


def register_tagger(name: str, factory: Callable[[], Tagger]):
    """Make a tagger available under ``name``."""
    _TAGGERS[name] = factory


def available_taggers() -> List[str]:
    return sorted(_TAGGERS)


def get_tagger(name: str) -> Tagger:
    try:
        return _TAGGERS[name]()
    except KeyError:
        raise UnknownTaggerError(
            f"Unknown tagger '{name}'. Available: {', '.join(available_taggers())}"
        ) from None


def to_coarse(tag: str) -> str:
    """Collapse a Penn Treebank tag; coarse tags pass through."""
    if tag in COARSE_TAGS:
        return tag
    if tag in PENN_TO_COARSE:
        return PENN_TO_COARSE[tag]
    logger.debug(f"Unmapped tag '{tag}' collapsed to X")
    return "X"


def tag_pos(
    reference: Sequence[str],
    tagger: Union[str, Tagger] = "lexicon",
    tagset: Tagset = COARSE,
    pre_tagged: Optional[Sequence[str]] = None,
) -> POSSequence:
    """
    Tag a tokenized reference.

    Args:
        reference: Tokens
        tagger: Registered tagger id or a tagger instance
        tagset: Inventory the ids refer to
        pre_tagged: Stored tags from the dataset; used instead of the tagger

    Returns:
        POSSequence aligned with ``reference``
    """
    if pre_tagged is not None:
        if len(pre_tagged) != len(reference):
            raise DataError(
                f"{len(pre_tagged)} stored tags for {len(reference)} reference tokens"
            )
        names = [to_coarse(tag) for tag in pre_tagged]
    else:
        if isinstance(tagger, str):
            tagger = get_tagger(tagger)
        names = [to_coarse(tag) for tag in tagger.tag(reference)]
    return POSSequence(tags=tuple(tagset.id_of(name) for name in names), tagset=tagset.name)
