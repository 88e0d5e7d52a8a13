"""Stage orchestration: ingest -> translate -> index -> match -> report.

Each stage reads the previous stage's artifact files from the output
directory and writes its own, so stages can be re-run individually and a
full run is just the stages executed back to back.  Artifacts are written
atomically; a failed full run removes whatever it had already written.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .evaluate import (
    BenchmarkSpec,
    DEFAULT_EDGES,
    compare_modes,
    evaluate_against_gold,
    histogram_scores,
    load_gold,
    make_synthetic_benchmark,
    save_gold,
    synthetic_seed_corpus,
)
from .index import build_index, load_index, save_index
from .ingest import (
    CorpusStats,
    DocumentPair,
    FilterConfig,
    clean_markup,
    filter_corpus,
    parse_document_pairs,
    stats_report,
    tokenized_sentences,
)
from .match import (
    MatchConfig,
    Mode,
    PenaltySource,
    generate_candidates,
    select_pairs,
)
from .translate import CoverageError, Direction, load_phrase_table, load_pretranslated, translate_corpus

log = logging.getLogger("bimine")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_STAGE = 4
EXIT_TRANSLATION = 5

ARTIFACTS = {
    "filtered": "filtered.jsonl",
    "stats": "stats.json",
    "stats_report": "stats.txt",
    "trans_fwd": "trans_fwd.tsv",
    "trans_rev": "trans_rev.tsv",
    "index_src": "index_src.txt",
    "index_tgt": "index_tgt.txt",
    "extracted": "extracted.tsv",
    "histogram": "histogram.csv",
    "report": "report.txt",
}


class PipelineError(Exception):
    """Failure with a machine-parseable class and a process exit code."""

    def __init__(self, error_class: str, exit_code: int, message: str):
        super().__init__(message)
        self.error_class = error_class
        self.exit_code = exit_code

    def one_line(self) -> str:
        return f"{self.error_class}: {self}"


def usage_error(message: str) -> PipelineError:
    return PipelineError("USAGE_ERROR", EXIT_USAGE, message)


def input_error(message: str) -> PipelineError:
    return PipelineError("INPUT_ERROR", EXIT_INPUT, message)


def stage_mismatch(message: str) -> PipelineError:
    return PipelineError("STAGE_MISMATCH", EXIT_STAGE, message)


def translation_missing(message: str) -> PipelineError:
    return PipelineError("TRANSLATION_MISSING", EXIT_TRANSLATION, message)


@dataclass
class PipelineConfig:
    input: str | None = None
    out_dir: str = "bimine_out"
    doc_ratio: float = 0.3
    min_words: int = 8
    alpha: float | None = None  # None: use the filtered corpus mean sentence length
    beta: float = 1.5
    top_k: int = 10
    cap: int = 2
    min_score: float = 0.0
    mode: str = "bi"
    penalty_source: str = "original_pair"
    phrase_table_fwd: str | None = None
    phrase_table_rev: str | None = None
    pretranslated_fwd: str | None = None
    pretranslated_rev: str | None = None
    edges: list[float] = field(default_factory=lambda: list(DEFAULT_EDGES))
    gold: str | None = None
    seed: int = 0
    jobs: int = 1

    def path(self, artifact: str) -> Path:
        return Path(self.out_dir) / ARTIFACTS[artifact]

    def filter_config(self) -> FilterConfig:
        try:
            return FilterConfig(self.doc_ratio, self.min_words)
        except ValueError as exc:
            raise usage_error(str(exc)) from None

    def match_config(self, alpha: float | None = None) -> MatchConfig:
        try:
            return MatchConfig(
                alpha=self.alpha if alpha is None else alpha,
                beta=self.beta,
                top_k=self.top_k,
                max_matches_per_sentence=self.cap,
                min_score=self.min_score,
                mode=Mode(self.mode),
                penalty_source=PenaltySource(self.penalty_source),
            )
        except ValueError as exc:
            raise usage_error(str(exc)) from None


_CONFIG_PARSERS = {
    "input": str,
    "out_dir": str,
    "doc_ratio": float,
    "min_words": int,
    "alpha": float,
    "beta": float,
    "top_k": int,
    "cap": int,
    "min_score": float,
    "mode": str,
    "penalty_source": str,
    "phrase_table_fwd": str,
    "phrase_table_rev": str,
    "pretranslated_fwd": str,
    "pretranslated_rev": str,
    "edges": lambda v: [float(x) for x in v.split(",")],
    "gold": str,
    "seed": int,
    "jobs": int,
}


def load_config_file(path: str | os.PathLike) -> dict:
    """Parse a flat ``key = value`` config file.  # starts a comment.
    Unknown keys are errors; values use the same syntax as the CLI flags."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise usage_error(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise usage_error(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        parser = _CONFIG_PARSERS.get(key)
        if parser is None:
            raise usage_error(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = parser(value)
        except ValueError:
            raise usage_error(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def build_config(file_values: dict, overrides: dict) -> PipelineConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    valid = {f.name for f in fields(PipelineConfig)}
    unknown = set(merged) - valid
    if unknown:
        raise usage_error(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = PipelineConfig(**merged)
    if cfg.mode not in ("bi", "one"):
        raise usage_error(f"mode must be 'bi' or 'one', not {cfg.mode!r}")
    if cfg.penalty_source not in ("original_pair", "translation_vs_candidate"):
        raise usage_error(f"unknown penalty_source {cfg.penalty_source!r}")
    return cfg


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _require(cfg: PipelineConfig, artifact: str, needed_by: str) -> Path:
    path = cfg.path(artifact)
    if not path.exists():
        raise stage_mismatch(f"{needed_by} needs {path}; run the earlier stages first")
    return path


def _check_fresh(path: Path, dependency: Path) -> None:
    if path.stat().st_mtime_ns < dependency.stat().st_mtime_ns:
        raise stage_mismatch(f"{path} is older than {dependency}; re-run the stage that builds it")


# --- stages ----------------------------------------------------------------


def stage_ingest(cfg: PipelineConfig) -> list[Path]:
    if not cfg.input:
        raise usage_error("no input file configured")
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            pairs, _ = parse_document_pairs(fh)
    except OSError as exc:
        raise input_error(f"cannot read input: {exc}") from None
    except ValueError as exc:
        raise input_error(f"{cfg.input}: {exc}") from None
    cleaned = [
        DocumentPair(
            p.doc_id,
            [clean_markup(s) for s in p.src_sentences],
            [clean_markup(s) for s in p.tgt_sentences],
        )
        for p in pairs
    ]
    filtered, stats = filter_corpus(cleaned, cfg.filter_config())
    log.info(
        "ingest: %d/%d document pairs kept, %d+%d sentences",
        stats.doc_pairs_after,
        stats.doc_pairs_before,
        stats.sentences_after[0],
        stats.sentences_after[1],
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    lines = [
        json.dumps({"id": p.doc_id, "src": p.src_sentences, "tgt": p.tgt_sentences}, ensure_ascii=False)
        for p in filtered
    ]
    _atomic_write(cfg.path("filtered"), "".join(line + "\n" for line in lines))
    _atomic_write(
        cfg.path("stats"),
        json.dumps(
            {
                "doc_pairs_before": stats.doc_pairs_before,
                "doc_pairs_after": stats.doc_pairs_after,
                "sentences_before": list(stats.sentences_before),
                "sentences_after": list(stats.sentences_after),
                "mean_sentence_length": stats.mean_sentence_length,
            }
        )
        + "\n",
    )
    _atomic_write(cfg.path("stats_report"), stats_report(stats))
    return [cfg.path("filtered"), cfg.path("stats"), cfg.path("stats_report")]


def _load_filtered(cfg: PipelineConfig, needed_by: str) -> list[DocumentPair]:
    path = _require(cfg, "filtered", needed_by)
    try:
        with open(path, encoding="utf-8") as fh:
            pairs, _ = parse_document_pairs(fh)
    except ValueError as exc:
        raise stage_mismatch(f"{path}: {exc}") from None
    return pairs


def _load_stats(cfg: PipelineConfig, needed_by: str) -> CorpusStats:
    path = _require(cfg, "stats", needed_by)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, OSError) as exc:
        raise stage_mismatch(f"{path}: {exc}") from None
    return CorpusStats(
        doc_pairs_before=data["doc_pairs_before"],
        doc_pairs_after=data["doc_pairs_after"],
        sentences_before=tuple(data["sentences_before"]),
        sentences_after=tuple(data["sentences_after"]),
        mean_sentence_length=data["mean_sentence_length"],
    )


def stage_translate(cfg: PipelineConfig) -> list[Path]:
    filtered = _load_filtered(cfg, "translate")
    src_sents, tgt_sents, _ = tokenized_sentences(filtered)
    written = []
    one_directional = cfg.mode == Mode.ONE_DIRECTIONAL.value
    for direction, side in ((Direction.FWD, tgt_sents), (Direction.REV, src_sents)):
        table_path = cfg.phrase_table_fwd if direction is Direction.FWD else cfg.phrase_table_rev
        pre_path = cfg.pretranslated_fwd if direction is Direction.FWD else cfg.pretranslated_rev
        if table_path and pre_path:
            raise usage_error(
                f"direction {direction.value}: phrase table and pre-translated file are mutually exclusive"
            )
        if not table_path and not pre_path:
            if direction is Direction.REV and one_directional:
                continue  # reverse translations are unused in one-directional mode
            raise usage_error(f"direction {direction.value}: no translator configured")
        refs = [s.ref for s in side]
        if pre_path:
            if not os.path.exists(pre_path):
                raise translation_missing(f"pre-translated file not found: {pre_path}")
            try:
                trans = load_pretranslated(pre_path, direction, refs)
            except CoverageError as exc:
                raise translation_missing(f"{pre_path}: {exc}") from None
            except ValueError as exc:
                raise input_error(f"{pre_path}: {exc}") from None
        else:
            if not os.path.exists(table_path):
                raise translation_missing(f"phrase table not found: {table_path}")
            try:
                table = load_phrase_table(table_path, direction)
            except ValueError as exc:
                raise input_error(f"{table_path}: {exc}") from None
            trans = translate_corpus(side, table)
        artifact = "trans_fwd" if direction is Direction.FWD else "trans_rev"
        rows = [
            f"{ref.doc_id}\t{ref.index}\t{' '.join(trans.translations[ref])}\n" for ref in refs
        ]
        _atomic_write(cfg.path(artifact), "".join(rows))
        written.append(cfg.path(artifact))
        log.info("translate: %s, %d sentences", direction.value, len(refs))
    return written


def stage_index(cfg: PipelineConfig) -> list[Path]:
    filtered = _load_filtered(cfg, "index")
    src_sents, tgt_sents, _ = tokenized_sentences(filtered)
    save_index(build_index(src_sents), cfg.path("index_src"))
    save_index(build_index(tgt_sents), cfg.path("index_tgt"))
    log.info("index: %d src docs, %d tgt docs", len(src_sents), len(tgt_sents))
    return [cfg.path("index_src"), cfg.path("index_tgt")]


def stage_match(cfg: PipelineConfig) -> list[Path]:
    filtered_path = _require(cfg, "filtered", "match")
    filtered = _load_filtered(cfg, "match")
    stats = _load_stats(cfg, "match")
    src_sents, tgt_sents, texts = tokenized_sentences(filtered)
    out_path = cfg.path("extracted")
    if not filtered:
        _atomic_write(out_path, "")
        log.info("match: empty corpus, empty extraction")
        return [out_path]

    bidirectional = cfg.mode == Mode.BIDIRECTIONAL.value
    needed = ["index_src", "index_tgt", "trans_fwd"] + (["trans_rev"] if bidirectional else [])
    for artifact in needed:
        path = _require(cfg, artifact, "match")
        _check_fresh(path, filtered_path)
    try:
        src_index = load_index(cfg.path("index_src"))
        tgt_index = load_index(cfg.path("index_tgt"))
    except ValueError as exc:
        raise stage_mismatch(str(exc)) from None
    try:
        trans_fwd = load_pretranslated(cfg.path("trans_fwd"), Direction.FWD, [s.ref for s in tgt_sents])
        trans_rev = (
            load_pretranslated(cfg.path("trans_rev"), Direction.REV, [s.ref for s in src_sents])
            if bidirectional
            else None
        )
    except CoverageError as exc:
        raise translation_missing(str(exc)) from None
    except ValueError as exc:
        raise stage_mismatch(str(exc)) from None

    alpha = cfg.alpha if cfg.alpha is not None else stats.mean_sentence_length
    if not alpha > 0:
        raise input_error("cannot resolve alpha: corpus mean sentence length is 0")
    match_cfg = cfg.match_config(alpha=alpha)
    candidates = generate_candidates(
        src_index, tgt_index, trans_fwd, trans_rev, match_cfg, jobs=max(1, cfg.jobs)
    )
    extracted = select_pairs(candidates, match_cfg, texts)
    rows = [
        f"{p.pair.bisim!r}\t{p.pair.sim_fwd!r}\t{p.pair.sim_rev!r}"
        f"\t{p.pair.src.doc_id}:{p.pair.src.index}\t{p.pair.tgt.doc_id}:{p.pair.tgt.index}"
        f"\t{p.src_text}\t{p.tgt_text}\n"
        for p in extracted
    ]
    _atomic_write(out_path, "".join(rows))
    log.info("match: %d candidates, %d extracted", len(candidates), len(extracted))
    return [out_path]


def stage_report(cfg: PipelineConfig) -> list[Path]:
    extracted_path = _require(cfg, "extracted", "report")
    scores = []
    refs = []
    with open(extracted_path, encoding="utf-8") as fh:
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            scores.append(float(cells[0]))
            refs.append((cells[3], cells[4]))
    try:
        hist = histogram_scores(scores, cfg.edges)
    except ValueError as exc:
        raise usage_error(str(exc)) from None
    csv_lines = ["interval_start,interval_end,count"]
    csv_lines += [f"{start!r},{end!r},{count}" for start, end, count in hist.rows()]
    _atomic_write(cfg.path("histogram"), "\n".join(csv_lines) + "\n")

    lines = [
        "extraction report",
        "",
        f"extracted pairs: {len(scores)}",
        "",
        "score distribution (interval edges are tool defaults unless configured):",
    ]
    for start, end, count in hist.rows():
        end_text = "inf" if end == float("inf") else f"{end:g}"
        lines.append(f"  [{start:g}, {end_text}): {count}")
    if cfg.gold:
        gold = load_gold(cfg.gold)
        found = {_parse_ref_cell(s, t) for s, t in refs}
        correct = len(found & gold.pairs)
        precision = correct / len(found) if found else 0.0
        recall = correct / len(gold.pairs) if gold.pairs else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        lines += [
            "",
            f"gold pairs: {len(gold.pairs)}",
            f"precision: {precision:.4f}",
            f"recall: {recall:.4f}",
            f"f1: {f1:.4f}",
        ]
    _atomic_write(cfg.path("report"), "\n".join(lines) + "\n")
    return [cfg.path("histogram"), cfg.path("report")]


def _parse_ref_cell(src_cell: str, tgt_cell: str):
    from .normalize import Lang, SentenceRef

    sdoc, _, sidx = src_cell.rpartition(":")
    tdoc, _, tidx = tgt_cell.rpartition(":")
    return (SentenceRef(sdoc, int(sidx), Lang.SRC), SentenceRef(tdoc, int(tidx), Lang.TGT))


STAGES = {
    "ingest": stage_ingest,
    "translate": stage_translate,
    "index": stage_index,
    "match": stage_match,
    "report": stage_report,
}

_RUN_ORDER = ["ingest", "translate", "index", "match", "report"]


def run_pipeline(cfg: PipelineConfig) -> int:
    """All stages back to back.  On failure, artifacts already written by
    this run are removed so no half-finished output survives."""
    written: list[Path] = []
    try:
        for name in _RUN_ORDER:
            written += STAGES[name](cfg)
    except BaseException:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise
    return EXIT_OK


def run_bench(
    cfg: PipelineConfig,
    n_parallel: int,
    n_distractors: int,
    dropout: float,
    docs_per_side: int = 20,
) -> Path:
    """Generate a seeded synthetic benchmark, run both modes over it and
    write the comparison report plus the benchmark inputs."""
    seed_corpus = synthetic_seed_corpus(n_parallel + 2 * n_distractors, seed=cfg.seed)
    spec = BenchmarkSpec(
        n_parallel=n_parallel,
        n_distractors_src=n_distractors,
        n_distractors_tgt=n_distractors,
        docs=docs_per_side,
        dropout=dropout,
        seed=cfg.seed,
    )
    benchmark = make_synthetic_benchmark(seed_corpus, spec)
    os.makedirs(cfg.out_dir, exist_ok=True)
    docs, (fwd_table, rev_table), gold = benchmark
    corpus_lines = [
        json.dumps({"id": d.doc_id, "src": d.src_sentences, "tgt": d.tgt_sentences}, ensure_ascii=False)
        for d in docs
    ]
    _atomic_write(Path(cfg.out_dir) / "bench_corpus.jsonl", "".join(l + "\n" for l in corpus_lines))
    for name, table in (("bench_table_fwd.tsv", fwd_table), ("bench_table_rev.tsv", rev_table)):
        rows = [
            f"{' '.join(src)}\t{' '.join(tgt)}\t{weight!r}\n"
            for src, (tgt, weight) in table.entries.items()
        ]
        _atomic_write(Path(cfg.out_dir) / name, "".join(rows))
    save_gold(gold, Path(cfg.out_dir) / "bench_gold.tsv")
    bi, one, report = compare_modes(
        benchmark, cfg.match_config(), cfg.filter_config(), jobs=max(1, cfg.jobs)
    )
    header = (
        f"benchmark: {n_parallel} true pairs, {n_distractors} distractors per side, "
        f"dropout {dropout:g}, seed {cfg.seed}\n\n"
    )
    report_path = Path(cfg.out_dir) / "bench_report.txt"
    _atomic_write(report_path, header + report)
    return report_path
