"""Pluggable translation boundary.

The matching pipeline only ever consumes whole translated corpora, so a
translator here is anything that yields one token list per sentence:
either the built-in deterministic phrase-table translator, or files of
externally produced translations.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .normalize import Lang, SentenceRef, TokenizedSentence, tokenize


class Direction(Enum):
    """FWD renders TGT-side sentences in the SRC language; REV the reverse."""

    FWD = "fwd"
    REV = "rev"

    @property
    def source_lang(self) -> Lang:
        return Lang.TGT if self is Direction.FWD else Lang.SRC

    @property
    def target_lang(self) -> Lang:
        return Lang.SRC if self is Direction.FWD else Lang.TGT


@dataclass
class PhraseTable:
    entries: dict[tuple[str, ...], tuple[tuple[str, ...], float]]
    direction: Direction
    max_phrase_len: int


@dataclass
class TranslationSet:
    direction: Direction
    translations: dict[SentenceRef, list[str]]


class CoverageError(ValueError):
    """A translation set does not cover the corpus it must translate."""


def load_phrase_table(source, direction: Direction) -> PhraseTable:
    """Load a phrase table from tab-separated text.

    Each line is ``source phrase TAB target phrase [TAB weight]`` with
    space-separated tokens and a default weight of 1.0.  On duplicate
    source phrases the highest weight wins, ties go to the first line.
    ``source`` may be a path or an iterable of lines.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_phrase_table(fh, direction)
    entries: dict[tuple[str, ...], tuple[tuple[str, ...], float]] = {}
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ValueError(f"line {lineno}: expected at least 2 tab-separated fields")
        src = tuple(fields[0].split())
        tgt = tuple(fields[1].split())
        if not src or not tgt:
            raise ValueError(f"line {lineno}: empty source or target phrase")
        if len(fields) >= 3 and fields[2]:
            try:
                weight = float(fields[2])
            except ValueError:
                raise ValueError(f"line {lineno}: weight {fields[2]!r} is not a number") from None
        else:
            weight = 1.0
        existing = entries.get(src)
        if existing is None or weight > existing[1]:
            entries[src] = (tgt, weight)
    max_len = max((len(k) for k in entries), default=0)
    return PhraseTable(entries, direction, max_len)


def translate_sentence(tokens: Sequence[str], table: PhraseTable) -> list[str]:
    """Greedy left-to-right longest-match decoding with OOV passthrough."""
    entries = table.entries
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = False
        for size in range(min(table.max_phrase_len, n - i), 0, -1):
            entry = entries.get(tuple(tokens[i : i + size]))
            if entry is not None:
                out.extend(entry[0])
                i += size
                matched = True
                break
        if not matched:
            out.append(tokens[i])
            i += 1
    return out


def translate_corpus(
    sentences: Iterable[TokenizedSentence], table: PhraseTable
) -> TranslationSet:
    """Translate every sentence of one corpus side.

    Coverage is total by construction: untranslatable tokens pass through
    unchanged.
    """
    translations: dict[SentenceRef, list[str]] = {}
    if table.max_phrase_len <= 1:
        # Word tables dominate in practice; skip the n-gram window.
        unigrams = {key[0]: list(tgt) for key, (tgt, _) in table.entries.items()}
        for sent in sentences:
            out: list[str] = []
            for token in sent.tokens:
                hit = unigrams.get(token)
                if hit is None:
                    out.append(token)
                else:
                    out.extend(hit)
            translations[sent.ref] = out
    else:
        for sent in sentences:
            translations[sent.ref] = translate_sentence(sent.tokens, table)
    return TranslationSet(table.direction, translations)


def load_pretranslated(
    source, direction: Direction, expected: Sequence[SentenceRef]
) -> TranslationSet:
    """Load externally produced translations from tab-separated text.

    Each line is ``doc_id TAB sentence_index TAB translated text``; the
    text is tokenized in the direction's target language.  The file must
    reference only known sentences, reference none twice, and cover every
    sentence in ``expected``.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_pretranslated(fh, direction, expected)
    known = set(expected)
    lang = direction.source_lang
    parsed: dict[SentenceRef, list[str]] = {}
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t", 2)
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected doc_id, index and text fields")
        doc_id, index_text, text = fields
        try:
            index = int(index_text)
        except ValueError:
            raise ValueError(f"line {lineno}: index {index_text!r} is not an integer") from None
        ref = SentenceRef(doc_id, index, lang)
        if ref not in known:
            raise CoverageError(f"line {lineno}: unknown sentence {ref}")
        if ref in parsed:
            raise CoverageError(f"line {lineno}: duplicate translation for {ref}")
        parsed[ref] = tokenize(text, direction.target_lang)
    missing = [ref for ref in expected if ref not in parsed]
    if missing:
        shown = ", ".join(str(r) for r in missing[:10])
        more = f" (and {len(missing) - 10} more)" if len(missing) > 10 else ""
        raise CoverageError(f"missing translations for {shown}{more}")
    return TranslationSet(direction, {ref: parsed[ref] for ref in expected})
