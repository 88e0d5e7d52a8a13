"""Tokenization and normalization shared by every other module.

All word counts in the toolkit (sentence length filter, mean sentence
length, length penalty) are defined as ``len(tokenize(text, lang))``.
There is deliberately no second notion of "word" anywhere: the filters,
the length penalty and the retrieval index must agree on what a word is,
otherwise term matching drifts away from the counts.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum

ZWNJ = "‌"

# Web text in the Persian role mixes Arabic and Persian codepoints for the
# same letters; unify them or identical words never match in the index.
_ARABIC_TO_PERSIAN = str.maketrans({"ي": "ی", "ك": "ک"})


class Lang(Enum):
    """Which side of the bilingual corpus a sentence belongs to."""

    SRC = "src"
    TGT = "tgt"


@dataclass(frozen=True, slots=True)
class SentenceRef:
    """Corpus-wide address of one sentence: (doc_id, position, side)."""

    doc_id: str
    index: int
    lang: Lang

    def __str__(self) -> str:
        return f"{self.doc_id}:{self.index}:{self.lang.value}"

    def sort_key(self) -> tuple[str, int, str]:
        return (self.doc_id, self.index, self.lang.value)


@dataclass(frozen=True, slots=True)
class TokenizedSentence:
    ref: SentenceRef
    tokens: tuple[str, ...]
    raw: str


def _is_strippable(ch: str) -> bool:
    # Edge punctuation is stripped; a ZWNJ at a token edge joins nothing
    # and would make visually identical words compare unequal.
    return ch == ZWNJ or unicodedata.category(ch).startswith("P")


def _trim(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_strippable(token[start]):
        start += 1
    while end > start and _is_strippable(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str, lang: Lang) -> list[str]:
    """Normalize ``text`` into a token list.

    Lowercases, splits on Unicode whitespace, strips leading/trailing
    punctuation from each token and drops tokens that become empty.  For
    the TGT side, Arabic Yeh/Kaf are mapped to their Persian forms and
    ZWNJ is kept inside tokens (it is never a split point).
    """
    text = text.lower()
    if lang is Lang.TGT:
        text = text.translate(_ARABIC_TO_PERSIAN)
    out = []
    for piece in text.split():
        token = _trim(piece)
        if token:
            out.append(token)
    return out


def word_count(text: str, lang: Lang) -> int:
    return len(tokenize(text, lang))


def tokenized(ref: SentenceRef, raw: str) -> TokenizedSentence:
    return TokenizedSentence(ref, tuple(tokenize(raw, ref.lang)), raw)
