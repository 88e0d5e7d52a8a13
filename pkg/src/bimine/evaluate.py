"""Reporting and evaluation: score histograms, gold-alignment scoring,
synthetic benchmark generation and the two-mode comparison harness."""

from __future__ import annotations

import os
import random
from bisect import bisect_right
from dataclasses import dataclass, replace
from math import ceil
from typing import Iterable, Sequence

from .index import build_index
from .ingest import DocumentPair, FilterConfig, filter_corpus, tokenized_sentences
from .match import ExtractedPair, MatchConfig, Mode, Probe, generate_candidates, select_pairs
from .normalize import Lang, SentenceRef, tokenize
from .translate import Direction, PhraseTable, translate_corpus

DEFAULT_EDGES = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]


@dataclass
class Histogram:
    """Counts per half-open interval; the last interval is unbounded."""

    edges: list[float]
    counts: list[int]

    def rows(self) -> list[tuple[float, float, int]]:
        ends = self.edges[1:] + [float("inf")]
        return list(zip(self.edges, ends, self.counts))


@dataclass
class GoldAlignment:
    pairs: set[tuple[SentenceRef, SentenceRef]]


@dataclass
class ExtractionScore:
    precision: float
    recall: float
    f1: float
    extracted_count: int
    gold_count: int


@dataclass
class BenchmarkSpec:
    n_parallel: int
    n_distractors_src: int = 0
    n_distractors_tgt: int = 0
    docs: int = 10
    dropout: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_parallel < 1:
            raise ValueError("n_parallel must be >= 1")
        if self.n_distractors_src < 0 or self.n_distractors_tgt < 0:
            raise ValueError("distractor counts must be >= 0")
        if self.docs < 1:
            raise ValueError("docs must be >= 1")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")


Benchmark = tuple[list[DocumentPair], tuple[PhraseTable, PhraseTable], GoldAlignment]


def histogram_scores(scores: Iterable[float], edges: Sequence[float]) -> Histogram:
    """Bin scores into [e0,e1), ..., [e_last, inf).  Binning is total:
    scores below the first edge land in the first interval."""
    edges = list(edges)
    if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
        raise ValueError("edges must be strictly ascending with at least 2 values")
    counts = [0] * len(edges)
    for score in scores:
        slot = bisect_right(edges, score) - 1
        counts[max(0, slot)] += 1
    return Histogram(edges, counts)


def histogram(pairs: Sequence[ExtractedPair], edges: Sequence[float]) -> Histogram:
    return histogram_scores((p.pair.bisim for p in pairs), edges)


def evaluate_against_gold(
    extracted: Sequence[ExtractedPair], gold: GoldAlignment
) -> ExtractionScore:
    found = {(p.pair.src, p.pair.tgt) for p in extracted}
    correct = len(found & gold.pairs)
    precision = correct / len(found) if found else 0.0
    recall = correct / len(gold.pairs) if gold.pairs else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ExtractionScore(precision, recall, f1, len(found), len(gold.pairs))


def load_gold(source) -> GoldAlignment:
    """Gold file: one known pair per line, src_doc TAB src_idx TAB tgt_doc TAB tgt_idx."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_gold(fh)
    pairs = set()
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 4 tab-separated fields")
        try:
            src = SentenceRef(fields[0], int(fields[1]), Lang.SRC)
            tgt = SentenceRef(fields[2], int(fields[3]), Lang.TGT)
        except ValueError:
            raise ValueError(f"line {lineno}: indexes must be integers") from None
        pairs.add((src, tgt))
    return GoldAlignment(pairs)


def save_gold(gold: GoldAlignment, path: str | os.PathLike) -> None:
    rows = sorted(gold.pairs, key=lambda p: (p[0].sort_key(), p[1].sort_key()))
    with open(path, "w", encoding="utf-8") as fh:
        for src, tgt in rows:
            fh.write(f"{src.doc_id}\t{src.index}\t{tgt.doc_id}\t{tgt.index}\n")


# --- synthetic corpora ----------------------------------------------------

_SRC_LETTERS = "abcdefghijklm"
_MIRROR = str.maketrans(_SRC_LETTERS, "nopqrstuvwxyz")


def synthetic_seed_corpus(
    n_pairs: int,
    seed: int = 0,
    vocab_size: int | None = None,
    min_len: int = 8,
    max_len: int = 14,
) -> list[tuple[str, str]]:
    """Word-for-word parallel sentence pairs over a synthetic vocabulary.

    SRC words use only letters a..m and each TGT word is its letter-wise
    mirror into n..z, so the two sides never collide in the index and the
    positional word alignment is exact.  Lengths start at 8 tokens so the
    default sentence filter keeps everything.
    """
    if vocab_size is None:
        vocab_size = max(40, n_pairs // 5)
    rng = random.Random(seed)
    vocab: list[str] = []
    seen: set[str] = set()
    while len(vocab) < vocab_size:
        word = "".join(rng.choice(_SRC_LETTERS) for _ in range(rng.randint(4, 8)))
        if word not in seen:
            seen.add(word)
            vocab.append(word)
    out = []
    for _ in range(n_pairs):
        words = [vocab[rng.randrange(vocab_size)] for _ in range(rng.randint(min_len, max_len))]
        out.append((" ".join(words), " ".join(w.translate(_MIRROR) for w in words)))
    return out


def make_synthetic_benchmark(
    parallel_seed_corpus: Sequence[tuple[str, str]], spec: BenchmarkSpec
) -> Benchmark:
    """Assemble a comparable corpus with known-parallel pairs.

    True pairs contribute both sides and are recorded in the gold set;
    distractors contribute one side only and are drawn from held-out seed
    pairs (src- and tgt-distractors from disjoint pairs, so no unrecorded
    parallelism sneaks in).  Phrase tables come from positional word
    alignments over the whole seed corpus, each entry then dropped with
    probability ``spec.dropout``.  Everything is a pure function of
    (seed corpus, spec).
    """
    need = spec.n_parallel + spec.n_distractors_src + spec.n_distractors_tgt
    if len(parallel_seed_corpus) < spec.n_parallel:
        raise ValueError(
            f"seed corpus has {len(parallel_seed_corpus)} pairs, need {spec.n_parallel} true pairs"
        )
    if len(parallel_seed_corpus) < need:
        raise ValueError(
            f"seed corpus has {len(parallel_seed_corpus)} pairs, "
            f"need {need} for true pairs plus held-out distractors"
        )
    rng = random.Random(spec.seed)
    order = list(range(len(parallel_seed_corpus)))
    rng.shuffle(order)
    true_ids = order[: spec.n_parallel]
    d_src = order[spec.n_parallel : spec.n_parallel + spec.n_distractors_src]
    d_tgt = order[spec.n_parallel + spec.n_distractors_src : need]

    fwd_table, rev_table = _aligned_tables(parallel_seed_corpus, spec.dropout, rng)

    # Streams carry (text, seed id or None); gold refs are resolved after
    # shuffling and chunking into documents.
    src_stream = [(parallel_seed_corpus[i][0], i) for i in true_ids]
    src_stream += [(parallel_seed_corpus[i][0], None) for i in d_src]
    tgt_stream = [(parallel_seed_corpus[i][1], i) for i in true_ids]
    tgt_stream += [(parallel_seed_corpus[i][1], None) for i in d_tgt]
    rng.shuffle(src_stream)
    rng.shuffle(tgt_stream)

    n_chunks = max(1, ceil(max(len(src_stream), len(tgt_stream)) / spec.docs))
    src_chunks = _even_chunks(src_stream, n_chunks)
    tgt_chunks = _even_chunks(tgt_stream, n_chunks)
    docs: list[DocumentPair] = []
    src_pos: dict[int, SentenceRef] = {}
    tgt_pos: dict[int, SentenceRef] = {}
    for c in range(n_chunks):
        doc_id = f"doc{c:05d}"
        src_sents = []
        for i, (text, seed_id) in enumerate(src_chunks[c]):
            src_sents.append(text)
            if seed_id is not None:
                src_pos[seed_id] = SentenceRef(doc_id, i, Lang.SRC)
        tgt_sents = []
        for i, (text, seed_id) in enumerate(tgt_chunks[c]):
            tgt_sents.append(text)
            if seed_id is not None:
                tgt_pos[seed_id] = SentenceRef(doc_id, i, Lang.TGT)
        docs.append(DocumentPair(doc_id, src_sents, tgt_sents))
    gold = GoldAlignment({(src_pos[i], tgt_pos[i]) for i in true_ids})
    return docs, (fwd_table, rev_table), gold


def _aligned_tables(
    seed_corpus: Sequence[tuple[str, str]], dropout: float, rng: random.Random
) -> tuple[PhraseTable, PhraseTable]:
    # Positional alignment: token j of a src sentence pairs with token j of
    # its tgt sentence.  The most frequent counterpart wins per word.
    cooc: dict[tuple[str, str], int] = {}
    for src_text, tgt_text in seed_corpus:
        src_toks = tokenize(src_text, Lang.SRC)
        tgt_toks = tokenize(tgt_text, Lang.TGT)
        for s, t in zip(src_toks, tgt_toks):
            cooc[(s, t)] = cooc.get((s, t), 0) + 1
    best_rev: dict[str, tuple[str, int]] = {}
    best_fwd: dict[str, tuple[str, int]] = {}
    for (s, t), count in cooc.items():
        if s not in best_rev or count > best_rev[s][1]:
            best_rev[s] = (t, count)
        if t not in best_fwd or count > best_fwd[t][1]:
            best_fwd[t] = (s, count)
    rev_entries = {
        (s,): ((t,), float(count)) for s, (t, count) in best_rev.items() if rng.random() >= dropout
    }
    fwd_entries = {
        (t,): ((s,), float(count)) for t, (s, count) in best_fwd.items() if rng.random() >= dropout
    }
    fwd = PhraseTable(fwd_entries, Direction.FWD, 1 if fwd_entries else 0)
    rev = PhraseTable(rev_entries, Direction.REV, 1 if rev_entries else 0)
    return fwd, rev


def _even_chunks(items: list, n_chunks: int) -> list[list]:
    base, extra = divmod(len(items), n_chunks)
    chunks = []
    start = 0
    for c in range(n_chunks):
        size = base + (1 if c < extra else 0)
        chunks.append(items[start : start + size])
        start += size
    return chunks


# --- mode comparison ------------------------------------------------------


def compare_modes(
    benchmark: Benchmark,
    cfg: MatchConfig,
    filter_cfg: FilterConfig | None = None,
    jobs: int = 1,
    probe: Probe | None = None,
) -> tuple[ExtractionScore, ExtractionScore, str]:
    """Run extraction in both modes over one benchmark, sharing the indexes
    and translations, and score each against the gold alignment.

    Returns (bidirectional score, one-directional score, text report).
    """
    docs, (fwd_table, rev_table), gold = benchmark
    filtered, stats = filter_corpus(docs, filter_cfg or FilterConfig())
    src_sents, tgt_sents, texts = tokenized_sentences(filtered)
    src_index = build_index(src_sents)
    tgt_index = build_index(tgt_sents)
    trans_fwd = translate_corpus(tgt_sents, fwd_table)
    trans_rev = translate_corpus(src_sents, rev_table)
    if cfg.alpha is None:
        cfg = replace(cfg, alpha=stats.mean_sentence_length)
    results = {}
    for mode in (Mode.BIDIRECTIONAL, Mode.ONE_DIRECTIONAL):
        mode_cfg = replace(cfg, mode=mode)
        candidates = generate_candidates(
            src_index, tgt_index, trans_fwd, trans_rev, mode_cfg, jobs=jobs, probe=probe
        )
        extracted = select_pairs(candidates, mode_cfg, texts)
        results[mode] = evaluate_against_gold(extracted, gold)
    bi, one = results[Mode.BIDIRECTIONAL], results[Mode.ONE_DIRECTIONAL]
    report = comparison_report(bi, one)
    return bi, one, report


def comparison_report(bi: ExtractionScore, one: ExtractionScore) -> str:
    rows = [
        ("extracted", f"{bi.extracted_count}", f"{one.extracted_count}"),
        ("gold", f"{bi.gold_count}", f"{one.gold_count}"),
        ("precision", f"{bi.precision:.4f}", f"{one.precision:.4f}"),
        ("recall", f"{bi.recall:.4f}", f"{one.recall:.4f}"),
        ("f1", f"{bi.f1:.4f}", f"{one.f1:.4f}"),
    ]
    lines = ["mode comparison", "", f"{'':<12}{'bidirectional':>16}{'one-directional':>18}"]
    for name, b, o in rows:
        lines.append(f"{name:<12}{b:>16}{o:>18}")
    return "\n".join(lines) + "\n"
