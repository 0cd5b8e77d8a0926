"""Rule-based phrase decoupling and the prefix masks built from it.

A referring expression is split into ordered, contiguous phrases with an nltk
``RegexpParser`` grammar over the closed lexicon's tags. The mask of hierarchy
``j`` enables the words of the first ``j`` phrases.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import nltk
import numpy as np

from hierground.errors import ChunkingError
from hierground.text.lexicon import ADJ, DEFAULT_LEXICON, Lexicon

logger = logging.getLogger("hierground.text.chunker")

PHRASE_KINDS = ("noun", "verb", "preposition", "adjective")

GRAMMAR = r"""
    NP: {<DET|ADJ|NOUN|CONJ>+}
    VP: {<VERB>+}
    PP: {<PREP>+}
"""

_LABEL_KIND = {"NP": "noun", "VP": "verb", "PP": "preposition"}

_parser = nltk.RegexpParser(GRAMMAR)


@dataclass(frozen=True)
class Phrase:
    kind: str
    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "start": self.start, "end": self.end}


@dataclass(frozen=True)
class PhraseDecomposition:
    """Ordered contiguous phrases covering every word of a sentence."""

    tokens: tuple[str, ...]
    phrases: tuple[Phrase, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ChunkingError("cannot decompose an empty sentence")
        if not self.phrases:
            raise ChunkingError("a decomposition needs at least one phrase")
        cursor = 0
        for p in self.phrases:
            if p.kind not in PHRASE_KINDS:
                raise ChunkingError(f"unknown phrase kind {p.kind!r}")
            if p.start != cursor or p.end <= p.start:
                raise ChunkingError(f"phrase spans must be contiguous and non-empty; got {self.spans}")
            cursor = p.end
        if cursor != len(self.tokens):
            raise ChunkingError(f"phrases cover {cursor} of {len(self.tokens)} words")

    @classmethod
    def from_spans(cls, tokens: Sequence[str], spans: Sequence[tuple[str, int, int]]) -> PhraseDecomposition:
        """Build a decomposition from externally supplied (kind, start, end) spans."""
        return cls(tuple(tokens), tuple(Phrase(k, int(s), int(e)) for k, s, e in spans))

    @property
    def num_phrases(self) -> int:
        return len(self.phrases)

    @property
    def spans(self) -> list[tuple[int, int]]:
        return [(p.start, p.end) for p in self.phrases]

    def to_dict(self) -> dict[str, Any]:
        return {"tokens": list(self.tokens), "phrases": [p.to_dict() for p in self.phrases]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PhraseDecomposition:
        return cls.from_spans(data["tokens"], [(p["kind"], p["start"], p["end"]) for p in data["phrases"]])


@dataclass(frozen=True, eq=False)
class HierMask:
    """Binary prefix mask over text positions for hierarchy ``level`` (0 = empty)."""

    level: int
    bits: np.ndarray

    def __len__(self) -> int:
        return len(self.bits)

    def as_list(self) -> list[int]:
        return [int(b) for b in self.bits]

    def is_prefix(self) -> bool:
        ones = int(self.bits.sum())
        return bool(np.all(self.bits[:ones] == 1) and np.all(self.bits[ones:] == 0))


def _merge_tail(phrases: list[Phrase], max_phrases: int | None) -> list[Phrase]:
    if max_phrases is None or len(phrases) <= max_phrases:
        return phrases
    head = phrases[: max_phrases - 1]
    last = phrases[max_phrases - 1]
    merged = Phrase(last.kind, last.start, phrases[-1].end)
    logger.debug("merged %d trailing phrases into [%d, %d)", len(phrases) - max_phrases + 1, merged.start, merged.end)
    return [*head, merged]


def chunk(
    tokens: Sequence[str],
    lexicon: Lexicon = DEFAULT_LEXICON,
    annotations: Mapping[str, str] | None = None,
    max_phrases: int | None = 4,
) -> PhraseDecomposition:
    """Decouple ``tokens`` into noun, verb, prepositional and adjective phrases.

    Maximal runs of adjectives, nouns, determiners and conjunctions form noun
    phrases (a run of adjectives alone is an adjective phrase), verb runs form
    verb phrases and preposition runs prepositional phrases. Phrases beyond
    ``max_phrases`` merge into the last allowed phrase.

    Raises:
        ChunkingError: Empty input, or a token that is neither in the lexicon
            nor in ``annotations``.
    """
    if not tokens:
        raise ChunkingError("cannot chunk an empty sentence")
    if max_phrases is not None and max_phrases < 1:
        raise ChunkingError(f"max_phrases must be >= 1, got {max_phrases}")
    tagged = lexicon.tag(tokens, annotations)
    tree = _parser.parse(tagged)

    phrases: list[Phrase] = []
    cursor = 0
    for node in tree:
        if isinstance(node, nltk.Tree):
            leaves = node.leaves()
            kind = _LABEL_KIND[node.label()]
            if kind == "noun" and all(tag == ADJ for _, tag in leaves):
                kind = "adjective"
            phrases.append(Phrase(kind, cursor, cursor + len(leaves)))
            cursor += len(leaves)
        else:
            raise ChunkingError(f"grammar left token {node!r} outside any phrase")
    return PhraseDecomposition(tuple(tokens), tuple(_merge_tail(phrases, max_phrases)))


def phrase_position_encodings(decomposition: PhraseDecomposition) -> list[np.ndarray]:
    """One binary vector per phrase with ones exactly on that phrase's span."""
    n = len(decomposition.tokens)
    encodings = []
    for p in decomposition.phrases:
        vec = np.zeros(n, dtype=np.int8)
        vec[p.start : p.end] = 1
        encodings.append(vec)
    return encodings


def hierarchical_mask(decomposition: PhraseDecomposition, level: int) -> HierMask:
    """Sum of the first ``level`` phrase encodings.

    Raises:
        ChunkingError: ``level`` outside 1..L.
    """
    if not 1 <= level <= decomposition.num_phrases:
        raise ChunkingError(f"hierarchy level {level} outside 1..{decomposition.num_phrases}")
    encodings = phrase_position_encodings(decomposition)
    bits = np.sum(encodings[:level], axis=0).astype(np.int8)
    return HierMask(level=level, bits=bits)


def hierarchical_masks(decomposition: PhraseDecomposition) -> list[HierMask]:
    return [hierarchical_mask(decomposition, j) for j in range(1, decomposition.num_phrases + 1)]


def empty_mask(length: int) -> HierMask:
    return HierMask(level=0, bits=np.zeros(length, dtype=np.int8))


def cap_phrases(decomposition: PhraseDecomposition, max_phrases: int) -> PhraseDecomposition:
    """Merge phrases beyond ``max_phrases`` into the last allowed one."""
    if max_phrases < 1:
        raise ChunkingError(f"max_phrases must be >= 1, got {max_phrases}")
    return PhraseDecomposition(decomposition.tokens, tuple(_merge_tail(list(decomposition.phrases), max_phrases)))
