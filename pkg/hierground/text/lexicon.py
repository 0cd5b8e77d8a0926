"""Closed vocabulary shared by the chunker, the text encoder and the scene generator."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from hierground.errors import ChunkingError, InputError

ADJ = "ADJ"
NOUN = "NOUN"
CONJ = "CONJ"
VERB = "VERB"
PREP = "PREP"
DET = "DET"

POS_TAGS = (ADJ, NOUN, CONJ, VERB, PREP, DET)

COLORS = ("red", "green", "blue", "yellow", "white", "black", "orange", "purple")
SHAPES = ("square", "circle", "triangle")
RELATIONS = {
    "left of": ("left", "of"),
    "right of": ("right", "of"),
    "above": ("above",),
    "below": ("below",),
}

_BASE_ENTRIES: dict[str, str] = {
    **{c: ADJ for c in COLORS},
    **{s: NOUN for s in SHAPES},
    "left": PREP,
    "right": PREP,
    "of": PREP,
    "above": PREP,
    "below": PREP,
    "on": PREP,
    "and": CONJ,
    "the": DET,
    "cat": NOUN,
    "laying": VERB,
}


@dataclass(frozen=True)
class Lexicon:
    """Word -> POS tag map with stable token ids.

    Token ids follow sorted word order so they do not depend on insertion order.
    """

    entries: Mapping[str, str] = field(default_factory=lambda: dict(_BASE_ENTRIES))

    def __post_init__(self):
        bad = {w: t for w, t in self.entries.items() if t not in POS_TAGS}
        if bad:
            raise ChunkingError(f"unknown POS tags in lexicon: {bad}")

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return tuple(sorted(self.entries))

    @property
    def size(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def tag(self, tokens: Sequence[str], annotations: Mapping[str, str] | None = None) -> list[tuple[str, str]]:
        """Pair each token with its POS tag; ``annotations`` override the lexicon.

        Raises:
            ChunkingError: A token is neither in the lexicon nor annotated.
        """
        annotations = annotations or {}
        tagged = []
        for tok in tokens:
            tag = annotations.get(tok) or self.entries.get(tok)
            if tag is None:
                raise ChunkingError(f"unknown token {tok!r}: not in lexicon and no annotation given")
            if tag not in POS_TAGS:
                raise ChunkingError(f"token {tok!r} annotated with unknown tag {tag!r}")
            tagged.append((tok, tag))
        return tagged

    def token_ids(self, tokens: Sequence[str]) -> list[int]:
        index = {w: i for i, w in enumerate(self.vocabulary)}
        try:
            return [index[t] for t in tokens]
        except KeyError as e:
            raise InputError(f"token {e.args[0]!r} has no id in the vocabulary") from e


DEFAULT_LEXICON = Lexicon()


def tokenize(sentence: str) -> list[str]:
    return sentence.lower().split()
