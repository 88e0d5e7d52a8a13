"""bimine: mine parallel sentence pairs from comparable corpora.

The pipeline translates both sides of a document-aligned bilingual
corpus, retrieves candidate counterparts with a TF-IDF inverted index,
scores each pair with a penalty-weighted bidirectional similarity and
emits the score-sorted extracted corpus.
"""

__version__ = "0.1.0"

from .evaluate import (
    BenchmarkSpec,
    ExtractionScore,
    GoldAlignment,
    Histogram,
    compare_modes,
    evaluate_against_gold,
    histogram,
    make_synthetic_benchmark,
    synthetic_seed_corpus,
)
from .index import InvertedIndex, ScoredHit, build_index, score_pair, search_top_k
from .ingest import (
    CorpusStats,
    DocumentPair,
    FilterConfig,
    clean_markup,
    filter_corpus,
    parse_document_pairs,
)
from .match import (
    CandidatePair,
    ExtractedPair,
    MatchConfig,
    Mode,
    bisimilarity,
    compute_beta,
    compute_penalty,
    generate_candidates,
    select_pairs,
)
from .normalize import Lang, SentenceRef, TokenizedSentence, tokenize, word_count
from .translate import (
    Direction,
    PhraseTable,
    TranslationSet,
    load_phrase_table,
    load_pretranslated,
    translate_corpus,
    translate_sentence,
)

__all__ = [
    "BenchmarkSpec",
    "CandidatePair",
    "CorpusStats",
    "Direction",
    "DocumentPair",
    "ExtractedPair",
    "ExtractionScore",
    "FilterConfig",
    "GoldAlignment",
    "Histogram",
    "InvertedIndex",
    "Lang",
    "MatchConfig",
    "Mode",
    "PhraseTable",
    "ScoredHit",
    "SentenceRef",
    "TokenizedSentence",
    "TranslationSet",
    "bisimilarity",
    "build_index",
    "clean_markup",
    "compare_modes",
    "compute_beta",
    "compute_penalty",
    "evaluate_against_gold",
    "filter_corpus",
    "generate_candidates",
    "histogram",
    "load_phrase_table",
    "load_pretranslated",
    "make_synthetic_benchmark",
    "parse_document_pairs",
    "score_pair",
    "search_top_k",
    "select_pairs",
    "synthetic_seed_corpus",
    "tokenize",
    "translate_corpus",
    "translate_sentence",
    "word_count",
]
