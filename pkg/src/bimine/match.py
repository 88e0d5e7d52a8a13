"""Bidirectional candidate generation, pair scoring and selection.

Every candidate pair carries two directional retrieval similarities:
sim_fwd compares the original SRC sentence with the machine-translated
TGT sentence, sim_rev the original TGT sentence with the translated SRC
sentence.  The combined score shrinks with the word-count difference of
the pair and weights the forward direction by beta (the more trustworthy
translator gets the larger say).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

from .index import InvertedIndex, batch_search, score_pair
from .normalize import SentenceRef
from .translate import TranslationSet


class Mode(Enum):
    BIDIRECTIONAL = "bi"
    ONE_DIRECTIONAL = "one"


class PenaltySource(Enum):
    # Word-count difference of the two original sentences (default), or of
    # the retrieved sentence against the translation that retrieved it.
    ORIGINAL_PAIR = "original_pair"
    TRANSLATION_VS_CANDIDATE = "translation_vs_candidate"


@dataclass
class MatchConfig:
    alpha: float | None = None  # mean sentence length in tokens; resolved from corpus stats when None
    beta: float = 1.5
    top_k: int = 10
    max_matches_per_sentence: int = 2
    min_score: float = 0.0
    mode: Mode = Mode.BIDIRECTIONAL
    penalty_source: PenaltySource = PenaltySource.ORIGINAL_PAIR

    def __post_init__(self) -> None:
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_matches_per_sentence < 1:
            raise ValueError("max_matches_per_sentence must be >= 1")
        if self.min_score < 0:
            raise ValueError("min_score must be >= 0")


@dataclass(frozen=True, slots=True)
class CandidatePair:
    src: SentenceRef
    tgt: SentenceRef
    sim_fwd: float
    sim_rev: float
    penalty: int
    bisim: float


@dataclass(frozen=True, slots=True)
class ExtractedPair:
    pair: CandidatePair
    src_text: str
    tgt_text: str
    rank: int


def bisimilarity(sim_fwd: float, sim_rev: float, penalty: int, alpha: float, beta: float) -> float:
    """Combine two directional similarities into one pair score.

        (alpha / (alpha + penalty)) * (beta * sim_fwd + sim_rev) / (beta + 1)

    The first factor is 1 for equal-length pairs and halves the score when
    the word-count difference reaches alpha; the second is the weighted
    mean of the directional similarities.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if not beta > 0:
        raise ValueError("beta must be > 0")
    if penalty < 0:
        raise ValueError("penalty must be >= 0")
    if sim_fwd < 0 or sim_rev < 0:
        raise ValueError("similarities must be >= 0")
    return (alpha / (alpha + penalty)) * (beta * sim_fwd + sim_rev) / (beta + 1)


def one_directional_score(sim_fwd: float, penalty: int, alpha: float) -> float:
    """Baseline score: the length-penalty factor times sim_fwd alone."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if penalty < 0:
        raise ValueError("penalty must be >= 0")
    if sim_fwd < 0:
        raise ValueError("sim_fwd must be >= 0")
    return (alpha / (alpha + penalty)) * sim_fwd


def compute_beta(bleu_fwd: float, bleu_rev: float) -> float:
    """Relative translator quality as a log ratio: ln(bleu_fwd) / ln(bleu_rev).

    BLEU values are percentage points and must exceed 1, otherwise the
    logarithm flips sign or blows up.
    """
    if bleu_fwd <= 1 or bleu_rev <= 1:
        raise ValueError("BLEU values must be > 1")
    return math.log(bleu_fwd) / math.log(bleu_rev)


def compute_penalty(src, tgt) -> int:
    """Absolute word-count difference between two tokenized sentences."""
    return abs(len(src.tokens) - len(tgt.tokens))


Probe = Callable[[str, object], None]


def generate_candidates(
    src_index: InvertedIndex,
    tgt_index: InvertedIndex,
    trans_fwd: TranslationSet,
    trans_rev: TranslationSet | None,
    cfg: MatchConfig,
    jobs: int = 1,
    probe: Probe | None = None,
) -> list[CandidatePair]:
    """Retrieve and score candidate pairs.

    Direction one queries the SRC index with every translated TGT
    sentence.  In bidirectional mode direction two additionally queries
    the TGT index with every translated SRC sentence; the union of both
    hit sets is kept and a pair seen by only one direction gets its other
    similarity filled in by direct scoring.  Candidates come back in
    canonical (src ref, tgt ref) order.
    """
    alpha = cfg.alpha
    if alpha is None:
        raise ValueError("alpha is unresolved; set it from corpus statistics first")
    src_refs = src_index.doc_refs
    tgt_refs = tgt_index.doc_refs
    fwd_queries = _queries_for(trans_fwd, tgt_refs)
    # pair key -> [sim_fwd, sim_rev]
    pairs: dict[tuple[int, int], list[float | None]] = {}
    direction_one = []
    for t_ord, hits in enumerate(batch_search(src_index, fwd_queries, cfg.top_k, jobs)):
        for s_ord, score in hits:
            pairs[(s_ord, t_ord)] = [score, None]
            direction_one.append((s_ord, t_ord, score))
    if probe is not None:
        probe("direction_one", direction_one)

    rev_queries: list[list[str]] = []
    if cfg.mode is Mode.BIDIRECTIONAL:
        if trans_rev is None:
            raise ValueError("bidirectional mode needs reverse translations")
        rev_queries = _queries_for(trans_rev, src_refs)
        for s_ord, hits in enumerate(batch_search(tgt_index, rev_queries, cfg.top_k, jobs)):
            for t_ord, score in hits:
                found = pairs.get((s_ord, t_ord))
                if found is None:
                    pairs[(s_ord, t_ord)] = [None, score]
                else:
                    found[1] = score

    ordered = sorted(
        pairs, key=lambda key: (src_refs[key[0]].sort_key(), tgt_refs[key[1]].sort_key())
    )
    src_len = src_index.doc_len
    tgt_len = tgt_index.doc_len
    out: list[CandidatePair] = []
    for s_ord, t_ord in ordered:
        sim_fwd, sim_rev = pairs[(s_ord, t_ord)]
        if sim_fwd is None:
            sim_fwd = score_pair(src_index, fwd_queries[t_ord], src_refs[s_ord])
        if cfg.penalty_source is PenaltySource.ORIGINAL_PAIR:
            penalty = abs(src_len[s_ord] - tgt_len[t_ord])
        else:
            penalty = abs(len(fwd_queries[t_ord]) - src_len[s_ord])
        if cfg.mode is Mode.BIDIRECTIONAL:
            if sim_rev is None:
                sim_rev = score_pair(tgt_index, rev_queries[s_ord], tgt_refs[t_ord])
            bisim = bisimilarity(sim_fwd, sim_rev, penalty, alpha, cfg.beta)
        else:
            sim_rev = 0.0
            bisim = one_directional_score(sim_fwd, penalty, alpha)
        out.append(CandidatePair(src_refs[s_ord], tgt_refs[t_ord], sim_fwd, sim_rev, penalty, bisim))
    return out


def _queries_for(trans: TranslationSet, refs: Sequence[SentenceRef]) -> list[list[str]]:
    queries = []
    for ref in refs:
        tokens = trans.translations.get(ref)
        if tokens is None:
            raise ValueError(f"missing translation for {ref}")
        queries.append(tokens)
    return queries


def select_pairs(
    candidates: Sequence[CandidatePair],
    cfg: MatchConfig,
    texts: Mapping[SentenceRef, str],
) -> list[ExtractedPair]:
    """Greedy selection: best score first, at most max_matches_per_sentence
    uses of any sentence on either side, nothing below min_score."""
    seen: set[tuple[SentenceRef, SentenceRef]] = set()
    for cand in candidates:
        key = (cand.src, cand.tgt)
        if key in seen:
            raise ValueError(f"duplicate candidate pair ({cand.src}, {cand.tgt})")
        seen.add(key)
    ordered = sorted(
        candidates, key=lambda c: (-c.bisim, c.src.sort_key(), c.tgt.sort_key())
    )
    cap = cfg.max_matches_per_sentence
    used_src: dict[SentenceRef, int] = {}
    used_tgt: dict[SentenceRef, int] = {}
    out: list[ExtractedPair] = []
    for cand in ordered:
        if cand.bisim < cfg.min_score:
            break  # sorted descending: nothing further qualifies
        if used_src.get(cand.src, 0) >= cap or used_tgt.get(cand.tgt, 0) >= cap:
            continue
        used_src[cand.src] = used_src.get(cand.src, 0) + 1
        used_tgt[cand.tgt] = used_tgt.get(cand.tgt, 0) + 1
        out.append(
            ExtractedPair(cand, texts[cand.src], texts[cand.tgt], rank=len(out) + 1)
        )
    return out
