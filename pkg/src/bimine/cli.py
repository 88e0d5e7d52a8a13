"""Command-line interface.

Every pipeline option can come from a flat ``key = value`` config file
(--config) or from flags; flags win.  Exit codes: 0 success, 2 usage,
3 input error, 4 stage mismatch, 5 translation coverage.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .normalize import Lang, tokenize
from .pipeline import (
    STAGES,
    PipelineConfig,
    PipelineError,
    build_config,
    load_config_file,
    run_bench,
    run_pipeline,
)

log = logging.getLogger("bimine")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="key = value config file; flags override it")
    shared.add_argument("--input", help="document-aligned corpus, one JSON record per line")
    shared.add_argument("--out-dir", dest="out_dir", help="artifact directory (default bimine_out)")
    shared.add_argument("--doc-ratio", dest="doc_ratio", type=float, help="document ratio threshold (default 0.3)")
    shared.add_argument("--min-words", dest="min_words", type=int, help="minimum sentence length in words (default 8)")
    shared.add_argument("--alpha", type=float, help="mean sentence length; default: computed from the corpus")
    shared.add_argument("--beta", type=float, help="forward-translator weight (default 1.5)")
    shared.add_argument("--top-k", dest="top_k", type=int, help="retrieval candidates per sentence (default 10)")
    shared.add_argument("--cap", type=int, help="max matches per sentence (default 2)")
    shared.add_argument("--min-score", dest="min_score", type=float, help="minimum combined score (default 0)")
    shared.add_argument("--mode", choices=["bi", "one"], help="bidirectional or one-directional matching")
    shared.add_argument(
        "--penalty-source",
        dest="penalty_source",
        choices=["original_pair", "translation_vs_candidate"],
        help="which word counts feed the length penalty",
    )
    shared.add_argument("--phrase-table-fwd", dest="phrase_table_fwd", help="tgt-to-src phrase table TSV")
    shared.add_argument("--phrase-table-rev", dest="phrase_table_rev", help="src-to-tgt phrase table TSV")
    shared.add_argument("--pretranslated-fwd", dest="pretranslated_fwd", help="pre-translated tgt side TSV")
    shared.add_argument("--pretranslated-rev", dest="pretranslated_rev", help="pre-translated src side TSV")
    shared.add_argument("--edges", help="histogram interval edges, comma-separated")
    shared.add_argument("--gold", help="gold alignment TSV for the report stage")
    shared.add_argument("--seed", type=int, help="random seed for benchmark generation")
    shared.add_argument("--jobs", type=int, help="worker processes (env BIMINE_JOBS as fallback)")

    parser = argparse.ArgumentParser(
        prog="bimine",
        description="Mine parallel sentence pairs from document-aligned comparable corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[shared], help="run all stages")
    sub.add_parser("ingest", parents=[shared], help="parse, clean and filter the corpus")
    sub.add_parser("translate", parents=[shared], help="translate both sides")
    sub.add_parser("index", parents=[shared], help="build the retrieval indexes")
    sub.add_parser("match", parents=[shared], help="generate, score and select pairs")
    sub.add_parser("report", parents=[shared], help="histogram and evaluation report")

    bench = sub.add_parser("bench", parents=[shared], help="synthetic two-mode benchmark")
    bench.add_argument("--pairs", type=int, default=500, help="true parallel pairs (default 500)")
    bench.add_argument("--distractors", type=int, default=500, help="distractors per side (default 500)")
    bench.add_argument("--dropout", type=float, default=0.2, help="phrase-table dropout rate (default 0.2)")
    bench.add_argument("--docs", type=int, default=20, help="sentences per synthetic document (default 20)")

    tokens = sub.add_parser("tokens", help="debug: print the tokens of a sentence, one per line")
    tokens.add_argument("--lang", choices=["src", "tgt"], default="src")
    tokens.add_argument("text", nargs="?", help="text to tokenize; stdin when omitted")
    return parser


_CONFIG_KEYS = [
    "input", "out_dir", "doc_ratio", "min_words", "alpha", "beta", "top_k", "cap",
    "min_score", "mode", "penalty_source", "phrase_table_fwd", "phrase_table_rev",
    "pretranslated_fwd", "pretranslated_rev", "edges", "gold", "seed", "jobs",
]


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    if isinstance(overrides.get("edges"), str):
        try:
            overrides["edges"] = [float(x) for x in overrides["edges"].split(",")]
        except ValueError:
            raise PipelineError("USAGE_ERROR", 2, f"bad --edges value: {args.edges!r}") from None
    if overrides.get("jobs") is None and "jobs" not in file_values:
        env_jobs = os.environ.get("BIMINE_JOBS")
        if env_jobs:
            try:
                overrides["jobs"] = int(env_jobs)
            except ValueError:
                raise PipelineError("USAGE_ERROR", 2, f"bad BIMINE_JOBS value: {env_jobs!r}") from None
    return build_config(file_values, overrides)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "tokens":
        text = args.text if args.text is not None else sys.stdin.read()
        for token in tokenize(text, Lang(args.lang)):
            print(token)
        return 0

    try:
        cfg = config_from_args(args)
        if args.command == "run":
            return run_pipeline(cfg)
        if args.command == "bench":
            report_path = run_bench(cfg, args.pairs, args.distractors, args.dropout, args.docs)
            sys.stdout.write(report_path.read_text(encoding="utf-8"))
            return 0
        STAGES[args.command](cfg)
        return 0
    except PipelineError as exc:
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
