"""Corpus loading, markup cleaning and document/sentence filtering.

Input corpora are document-aligned: one JSON record per line with an id
and the raw sentence lists of both sides.  Cleaning reduces wiki-style
markup to plain text; filtering drops short sentences first and then
drops document pairs whose sides are too unbalanced.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Iterable

from .normalize import Lang, SentenceRef, TokenizedSentence, tokenize


@dataclass
class DocumentPair:
    """One aligned document: raw sentences of both language sides."""

    doc_id: str
    src_sentences: list[str]
    tgt_sentences: list[str]


@dataclass
class FilterConfig:
    doc_ratio_threshold: float = 0.3
    min_sentence_words: int = 8

    def __post_init__(self) -> None:
        if not 0 < self.doc_ratio_threshold <= 1:
            raise ValueError("doc_ratio_threshold must be in (0, 1]")
        if self.min_sentence_words < 1:
            raise ValueError("min_sentence_words must be >= 1")


@dataclass
class CorpusStats:
    doc_pairs_before: int = 0
    doc_pairs_after: int = 0
    sentences_before: tuple[int, int] = (0, 0)
    sentences_after: tuple[int, int] = (0, 0)
    mean_sentence_length: float = 0.0


def parse_document_pairs(lines: Iterable[str]) -> tuple[list[DocumentPair], int]:
    """Parse line-delimited JSON records into document pairs.

    Each non-blank line must be an object with fields ``id`` (string),
    ``src`` and ``tgt`` (arrays of strings).  Returns the pairs in input
    order plus the number of lines consumed.
    """
    pairs: list[DocumentPair] = []
    seen: set[str] = set()
    consumed = 0
    for lineno, line in enumerate(lines, 1):
        consumed = lineno
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: not a valid record: {exc}") from None
        if not isinstance(record, dict):
            raise ValueError(f"line {lineno}: record must be an object")
        try:
            doc_id, src, tgt = record["id"], record["src"], record["tgt"]
        except KeyError as exc:
            raise ValueError(f"line {lineno}: missing field {exc}") from None
        if not isinstance(doc_id, str):
            raise ValueError(f"line {lineno}: id must be a string")
        for name, value in (("src", src), ("tgt", tgt)):
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                raise ValueError(f"line {lineno}: {name} must be an array of strings")
        if doc_id in seen:
            raise ValueError(f"line {lineno}: duplicate document id {doc_id!r}")
        seen.add(doc_id)
        pairs.append(DocumentPair(doc_id, list(src), list(tgt)))
    return pairs, consumed


# Markup patterns.  Balanced constructs are removed innermost-first; an
# unbalanced opener is stripped greedily to the end of its line.
_TABLE = re.compile(r"\{\|[^\n]*?\|\}")
_TEMPLATE = re.compile(r"\{\{[^{}]*\}\}")
_LINK_PIPED = re.compile(r"\[\[([^\[\]|]*)\|([^\[\]]*)\]\]")
_LINK_PLAIN = re.compile(r"\[\[([^\[\]|]*)\]\]")
_TAG = re.compile(r"<[^<>\n]*>")
_OPENERS = [
    re.compile(r"\{\|[^\n]*"),
    re.compile(r"\{\{[^\n]*"),
    re.compile(r"\[\[[^\n]*"),
    re.compile(r"<[^\n]*"),
]
_WS = re.compile(r"\s+")


def clean_markup(raw: str) -> str:
    """Reduce wiki-flavored markup to plain text.

    Links keep their display text, template and table blocks vanish,
    angle-bracket tags vanish, whitespace is collapsed.  Total: anything
    unbalanced is stripped to end of line rather than rejected.
    """
    text = raw
    while _TABLE.search(text):
        text = _TABLE.sub(" ", text)
    while _TEMPLATE.search(text):
        text = _TEMPLATE.sub(" ", text)
    changed = True
    while changed:
        text, n_piped = _LINK_PIPED.subn(r"\2", text)
        text, n_plain = _LINK_PLAIN.subn(r"\1", text)
        changed = bool(n_piped or n_plain)
    text = _TAG.sub(" ", text)
    for opener in _OPENERS:
        text = opener.sub(" ", text)
    return _WS.sub(" ", text).strip()


Tokenizer = Callable[[str, Lang], list[str]]


def filter_corpus(
    pairs: list[DocumentPair],
    cfg: FilterConfig,
    tokenizer: Tokenizer = tokenize,
) -> tuple[list[DocumentPair], CorpusStats]:
    """Apply the sentence-length filter, then the document-ratio filter.

    Sentences shorter than ``min_sentence_words`` tokens are dropped
    first; a pair is then dropped entirely when its smaller side has
    fewer than ``doc_ratio_threshold`` times the sentences of the larger
    side (or when both sides emptied out).  Survivors keep their order.
    """
    kept: list[DocumentPair] = []
    before = [0, 0]
    after = [0, 0]
    token_total = 0
    sentence_total = 0
    for pair in pairs:
        before[0] += len(pair.src_sentences)
        before[1] += len(pair.tgt_sentences)
        src_kept, src_tokens = _keep_sentences(pair.src_sentences, Lang.SRC, cfg, tokenizer)
        tgt_kept, tgt_tokens = _keep_sentences(pair.tgt_sentences, Lang.TGT, cfg, tokenizer)
        lo = min(len(src_kept), len(tgt_kept))
        hi = max(len(src_kept), len(tgt_kept))
        if hi == 0 or lo < cfg.doc_ratio_threshold * hi:
            continue
        kept.append(DocumentPair(pair.doc_id, src_kept, tgt_kept))
        after[0] += len(src_kept)
        after[1] += len(tgt_kept)
        token_total += src_tokens + tgt_tokens
        sentence_total += len(src_kept) + len(tgt_kept)
    stats = CorpusStats(
        doc_pairs_before=len(pairs),
        doc_pairs_after=len(kept),
        sentences_before=(before[0], before[1]),
        sentences_after=(after[0], after[1]),
        mean_sentence_length=token_total / sentence_total if sentence_total else 0.0,
    )
    return kept, stats


def _keep_sentences(
    sentences: list[str], lang: Lang, cfg: FilterConfig, tokenizer: Tokenizer
) -> tuple[list[str], int]:
    kept = []
    token_count = 0
    for raw in sentences:
        n = len(tokenizer(raw, lang))
        if n < cfg.min_sentence_words:
            continue
        kept.append(raw)
        token_count += n
    return kept, token_count


def tokenized_sentences(
    pairs: list[DocumentPair],
) -> tuple[list[TokenizedSentence], list[TokenizedSentence], dict[SentenceRef, str]]:
    """Address every sentence of a (filtered) corpus.

    Returns the tokenized SRC side, the tokenized TGT side, and a lookup
    from ref to the raw sentence text.
    """
    src: list[TokenizedSentence] = []
    tgt: list[TokenizedSentence] = []
    texts: dict[SentenceRef, str] = {}
    for pair in pairs:
        for i, raw in enumerate(pair.src_sentences):
            ref = SentenceRef(pair.doc_id, i, Lang.SRC)
            src.append(TokenizedSentence(ref, tuple(tokenize(raw, Lang.SRC)), raw))
            texts[ref] = raw
        for i, raw in enumerate(pair.tgt_sentences):
            ref = SentenceRef(pair.doc_id, i, Lang.TGT)
            tgt.append(TokenizedSentence(ref, tuple(tokenize(raw, Lang.TGT)), raw))
            texts[ref] = raw
    return src, tgt, texts


def stats_report(stats: CorpusStats) -> str:
    """Render corpus statistics as a small before/after table."""
    lines = [
        "corpus statistics",
        "",
        f"{'':<10}{'documents':>12}{'sentences (src)':>18}{'sentences (tgt)':>18}",
        f"{'before':<10}{stats.doc_pairs_before:>12}"
        f"{stats.sentences_before[0]:>18}{stats.sentences_before[1]:>18}",
        f"{'after':<10}{stats.doc_pairs_after:>12}"
        f"{stats.sentences_after[0]:>18}{stats.sentences_after[1]:>18}",
        "",
        f"mean sentence length: {stats.mean_sentence_length:.4f} tokens",
    ]
    return "\n".join(lines) + "\n"
