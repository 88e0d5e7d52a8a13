"""Inverted index with TF-IDF scoring and deterministic top-k search.

The score of a document d for a query q is

    coord(q, d) * sum over matching terms t of qf(t) * sqrt(tf(t, d)) * idf(t)^2 * norm(d)

with idf(t) = max(0, 1 + ln(n_docs / (df(t) + 1))), norm(d) = 1 / sqrt(len(d))
and coord(q, d) = matched distinct query terms / distinct query terms.
There is no query-level normalization: scores from the two translation
directions are mixed downstream, so both must sit on one convention.

Ties are broken by insertion ordinal so that search results, and
everything derived from them, are reproducible run to run.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
from bisect import bisect_left
from dataclasses import dataclass
from heapq import nsmallest
from typing import Iterable, Sequence

from .normalize import Lang, SentenceRef, TokenizedSentence

INDEX_MAGIC = "bimine-index"
INDEX_VERSION = 1


@dataclass(frozen=True, slots=True)
class ScoredHit:
    doc: SentenceRef
    score: float


class InvertedIndex:
    """Immutable after build; concurrent reads are safe."""

    __slots__ = ("postings", "doc_freq", "doc_len", "doc_refs", "n_docs", "_ordinals", "_norms")

    def __init__(self) -> None:
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.doc_freq: dict[str, int] = {}
        self.doc_len: list[int] = []
        self.doc_refs: list[SentenceRef] = []
        self.n_docs: int = 0
        self._ordinals: dict[SentenceRef, int] = {}
        self._norms: list[float] = []

    def idf(self, term: str) -> float:
        df = self.doc_freq.get(term, 0)
        return max(0.0, 1.0 + math.log(self.n_docs / (df + 1)))

    def ordinal(self, ref: SentenceRef) -> int:
        ordn = self._ordinals.get(ref)
        if ordn is None:
            raise ValueError(f"unknown document {ref}")
        return ordn


def build_index(sentences: Iterable[TokenizedSentence]) -> InvertedIndex:
    """Index one corpus side.  Empty sentences count toward n_docs but can
    never be retrieved."""
    index = InvertedIndex()
    postings = index.postings
    for ordn, sent in enumerate(sentences):
        if sent.ref in index._ordinals:
            raise ValueError(f"duplicate sentence ref {sent.ref}")
        index._ordinals[sent.ref] = ordn
        index.doc_refs.append(sent.ref)
        length = len(sent.tokens)
        index.doc_len.append(length)
        index._norms.append(1.0 / math.sqrt(length) if length else 0.0)
        tf: dict[str, int] = {}
        for token in sent.tokens:
            tf[token] = tf.get(token, 0) + 1
        for term, freq in tf.items():
            postings.setdefault(term, []).append((ordn, freq))
    index.n_docs = len(index.doc_refs)
    index.doc_freq = {term: len(plist) for term, plist in postings.items()}
    return index


def _query_frequencies(query: Sequence[str]) -> dict[str, int]:
    # Insertion order fixes the summation order, which keeps score_pair
    # and search_top_k bit-identical.
    qf: dict[str, int] = {}
    for token in query:
        qf[token] = qf.get(token, 0) + 1
    return qf


def _tf_in(plist: list[tuple[int, int]], ordinal: int) -> int:
    pos = bisect_left(plist, (ordinal,))
    if pos < len(plist) and plist[pos][0] == ordinal:
        return plist[pos][1]
    return 0


def score_pair(index: InvertedIndex, query: Sequence[str], doc: SentenceRef) -> float:
    """Score one (query, document) pair directly; 0.0 when nothing matches."""
    ordn = index.ordinal(doc)
    qf = _query_frequencies(query)
    if not qf:
        return 0.0
    total = 0.0
    matched = 0
    for term, q in qf.items():
        plist = index.postings.get(term)
        if not plist:
            continue
        freq = _tf_in(plist, ordn)
        if freq == 0:
            continue
        idf = index.idf(term)
        total += q * math.sqrt(freq) * (idf * idf)
        matched += 1
    if matched == 0:
        return 0.0
    return total * index._norms[ordn] * (matched / len(qf))


def _search_ordinals(index: InvertedIndex, query: Sequence[str], k: int) -> list[tuple[int, float]]:
    qf = _query_frequencies(query)
    if not qf:
        return []
    acc: dict[int, float] = {}
    overlap: dict[int, int] = {}
    for term, q in qf.items():
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        idf_sq = idf * idf
        for ordn, freq in plist:
            contrib = q * math.sqrt(freq) * idf_sq
            if ordn in acc:
                acc[ordn] += contrib
                overlap[ordn] += 1
            else:
                acc[ordn] = contrib
                overlap[ordn] = 1
    norms = index._norms
    n_query = len(qf)
    scored = []
    for ordn, total in acc.items():
        score = total * norms[ordn] * (overlap[ordn] / n_query)
        if score > 0.0:
            scored.append((ordn, score))
    if len(scored) > k:
        return nsmallest(k, scored, key=lambda hit: (-hit[1], hit[0]))
    scored.sort(key=lambda hit: (-hit[1], hit[0]))
    return scored


def search_top_k(index: InvertedIndex, query: Sequence[str], k: int) -> list[ScoredHit]:
    """The k best-scoring documents, descending score, ordinal tie-break.

    Zero-score documents are never returned, so fewer than k hits come
    back when fewer match.  Every returned score equals score_pair for
    the same (query, doc).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    refs = index.doc_refs
    return [ScoredHit(refs[ordn], score) for ordn, score in _search_ordinals(index, query, k)]


# --- batched search -------------------------------------------------------
#
# Queries are independent; with jobs > 1 they are fanned out to forked
# workers in fixed-size chunks and gathered in submission order, so the
# result is identical to the sequential one.

_FORK_STATE: tuple[InvertedIndex, list, int] | None = None
_MIN_PARALLEL = 256


def _search_span(span: tuple[int, int]) -> list[list[tuple[int, float]]]:
    index, queries, k = _FORK_STATE  # type: ignore[misc]
    lo, hi = span
    return [_search_ordinals(index, queries[i], k) for i in range(lo, hi)]


def batch_search(
    index: InvertedIndex, queries: list, k: int, jobs: int = 1
) -> list[list[tuple[int, float]]]:
    """Run many queries; returns per-query (ordinal, score) hit lists."""
    if jobs <= 1 or len(queries) < _MIN_PARALLEL or not hasattr(os, "fork"):
        return [_search_ordinals(index, q, k) for q in queries]
    global _FORK_STATE
    chunk = max(1, -(-len(queries) // (jobs * 4)))
    spans = [(lo, min(lo + chunk, len(queries))) for lo in range(0, len(queries), chunk)]
    _FORK_STATE = (index, queries, k)
    try:
        with multiprocessing.get_context("fork").Pool(jobs) as pool:
            parts = pool.map(_search_span, spans)
    finally:
        _FORK_STATE = None
    return [hits for part in parts for hits in part]


# --- snapshot -------------------------------------------------------------
#
# Text layout, one record per line:
#   bimine-index <version>
#   ndocs <n>
#   D <token count> <json [doc_id, index, lang]>     (one per document, ordinal order)
#   T <term> <ordinal>:<tf> ...                      (one per term, first-seen order)
# Postings hold only integers, so save -> load reproduces scores exactly.


def save_index(index: InvertedIndex, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{INDEX_MAGIC} {INDEX_VERSION}\n")
        fh.write(f"ndocs {index.n_docs}\n")
        for ordn, ref in enumerate(index.doc_refs):
            payload = json.dumps([ref.doc_id, ref.index, ref.lang.value], ensure_ascii=False)
            fh.write(f"D {index.doc_len[ordn]} {payload}\n")
        for term, plist in index.postings.items():
            cells = " ".join(f"{ordn}:{freq}" for ordn, freq in plist)
            fh.write(f"T {term} {cells}\n")


def load_index(path: str | os.PathLike) -> InvertedIndex:
    index = InvertedIndex()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if header[:1] != [INDEX_MAGIC] or header[1:] != [str(INDEX_VERSION)]:
            raise ValueError(f"{path}: not a version-{INDEX_VERSION} {INDEX_MAGIC} snapshot")
        ndocs_line = fh.readline().split()
        if len(ndocs_line) != 2 or ndocs_line[0] != "ndocs":
            raise ValueError(f"{path}: malformed document count")
        n_docs = int(ndocs_line[1])
        for _ in range(n_docs):
            kind, length, payload = fh.readline().rstrip("\n").split(" ", 2)
            if kind != "D":
                raise ValueError(f"{path}: expected document record")
            doc_id, idx, lang = json.loads(payload)
            ref = SentenceRef(doc_id, idx, Lang(lang))
            index._ordinals[ref] = len(index.doc_refs)
            index.doc_refs.append(ref)
            index.doc_len.append(int(length))
            index._norms.append(1.0 / math.sqrt(int(length)) if int(length) else 0.0)
        for line in fh:
            parts = line.rstrip("\n").split(" ")
            if not parts or parts[0] != "T":
                raise ValueError(f"{path}: expected term record")
            term = parts[1]
            index.postings[term] = [
                (int(cell.split(":")[0]), int(cell.split(":")[1])) for cell in parts[2:]
            ]
    index.n_docs = n_docs
    index.doc_freq = {term: len(plist) for term, plist in index.postings.items()}
    return index
