"""Phrase decoupling over the closed synthetic vocabulary."""

from hierground.text.chunker import (
    HierMask,
    Phrase,
    PhraseDecomposition,
    cap_phrases,
    chunk,
    empty_mask,
    hierarchical_mask,
    hierarchical_masks,
    phrase_position_encodings,
)
from hierground.text.lexicon import DEFAULT_LEXICON, Lexicon, tokenize

__all__ = [
    "DEFAULT_LEXICON",
    "HierMask",
    "Lexicon",
    "Phrase",
    "PhraseDecomposition",
    "cap_phrases",
    "chunk",
    "empty_mask",
    "hierarchical_mask",
    "hierarchical_masks",
    "phrase_position_encodings",
    "tokenize",
]
