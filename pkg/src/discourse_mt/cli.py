"""Command-line entry point.

Exit status is zero on success. EXIT_RUN marks a failed document and
EXIT_CONFIG a configuration or usage problem.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .config import BackendConfig, ConfigError, InputConfig, RunConfig, load_config
from .evaluation import (
    DEFAULT_MAX_PATH_LEN,
    MissingArtifactError,
    evaluate_run,
    format_graph_stats,
    graph_stats,
    report_markdown,
)
from .ingestion import CorpusError, load_corpus
from .metrics import TermLexicon, ZPAnnotation
from .translation import make_gateway, run_corpus

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2

logger = logging.getLogger("discourse_mt")


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    backend: BackendConfig = config.backend
    if args.backend_url and args.mock_script:
        raise ConfigError("backend", "--backend-url and --mock-script are mutually exclusive")
    if args.backend_url:
        backend = replace(backend, kind="http", url=args.backend_url, mock_script=None)
    if args.mock_script:
        backend = replace(backend, kind="mock", mock_script=str(Path(args.mock_script).resolve()), url=None)
    config = replace(config, backend=backend)
    if args.seed is not None:
        config = replace(config, seed=args.seed, segmentation=replace(config.segmentation, seed=args.seed))
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        config = replace(config, workers=args.workers)
    if args.out:
        config = replace(config, out=args.out)
    if args.input:
        # references listed in the config belong to the replaced corpus
        config = replace(config, input=InputConfig(args.input, config.input.format, ()))
    if not config.out:
        raise ConfigError("out", "no output directory (set 'out' in the config or pass --out)")
    if not config.input.path:
        raise ConfigError("input.path", "no input corpus (set input.path or pass --input)")
    return config


def _accounting_line(label: str, acc: dict, wall: float | None = None) -> str:
    t = acc["total"]
    parts = [
        f"{label}:",
        f"calls={t['calls']}",
        f"backend_calls={t['backend_calls']}",
        f"cache_hits={t['cache_hits']}",
        f"prompt_tokens={t['prompt_tokens']}",
        f"completion_tokens={t['completion_tokens']}",
        f"latency={t['latency_s']:.2f}s",
    ]
    if wall is not None:
        parts.append(f"wall={wall:.2f}s")
    parts.append(f"cost={acc['estimated_cost']:.6f} {acc['currency']}")
    return " ".join(parts)


def cmd_translate(args: argparse.Namespace) -> int:
    try:
        config = _apply_overrides(load_config(args.config), args)
        items = load_corpus(config.input.path, config.input.format, config.input.references,
                            lang=config.source_lang, target_lang=config.target_lang)
        out = Path(config.out)
        gateway = make_gateway(config, cache_dir=out / "cache")
    except (ConfigError, CorpusError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = run_corpus([i.document for i in items], config, gateway, out)
    for acc in result.summary["per_document"]:
        print(_accounting_line(acc["doc_id"], acc))
    print(_accounting_line("corpus", result.summary, result.wall_time))
    for failure in result.failures:
        print(f"FAILED {failure}", file=sys.stderr)
    print(f"run directory: {out}")
    return EXIT_RUN if result.failures else EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        lexicon = TermLexicon.load(args.lexicon) if args.lexicon else None
        zp = ZPAnnotation.load(args.zp) if args.zp else None
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = evaluate_run(args.run_dir, args.refs or (), lexicon, zp, args.max_path_len)
    except (MissingArtifactError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN
    run_dir = Path(args.run_dir)
    (run_dir / "metrics.json").write_text(json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    md = report_markdown(report)
    (run_dir / "metrics.md").write_text(md, encoding="utf-8")
    print(md, end="")
    return EXIT_OK


def cmd_graph_stats(args: argparse.Namespace) -> int:
    try:
        stats = graph_stats(args.run_dir, args.max_path_len)
    except MissingArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print(format_graph_stats(stats))
    return EXIT_OK


def _max_len(text: str) -> int | None:
    return None if text.lower() in ("none", "0") else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discourse-mt", description="Graph-structured document translation")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("translate", help="translate a corpus as configured")
    tr.add_argument("--config", required=True, help="JSON or YAML run config")
    tr.add_argument("--backend-url", help="use the HTTP backend at this base URL")
    tr.add_argument("--mock-script", help="use the mock backend with this script")
    tr.add_argument("--seed", type=int, help="seed for random segmentation")
    tr.add_argument("--workers", type=int, help="documents processed in parallel")
    tr.add_argument("--out", help="run directory")
    tr.add_argument("--input", help="override input.path")
    tr.set_defaults(func=cmd_translate)

    ev = sub.add_parser("evaluate", help="score a finished run")
    ev.add_argument("--run-dir", required=True)
    ev.add_argument("--refs", action="append", help="reference file (repeatable)")
    ev.add_argument("--lexicon", help="terminology lexicon JSON")
    ev.add_argument("--zp", help="zero-pronoun annotation JSON")
    ev.add_argument("--max-path-len", type=_max_len, default=DEFAULT_MAX_PATH_LEN,
                    help="longest path enumerated (0 for unbounded)")
    ev.set_defaults(func=cmd_evaluate)

    gs = sub.add_parser("graph-stats", help="graph shape distributions of a run")
    gs.add_argument("--run-dir", required=True)
    gs.add_argument("--json", action="store_true")
    gs.add_argument("--max-path-len", type=_max_len, default=DEFAULT_MAX_PATH_LEN)
    gs.set_defaults(func=cmd_graph_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
