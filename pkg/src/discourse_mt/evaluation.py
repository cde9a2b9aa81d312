"""Loading run directories back and scoring them.

Produces the metrics report (JSON and a Markdown table) and the graph
distribution statistics for a finished run.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .config import RunConfig
from .core import Discourse, DiscourseGraph, Document, LocalMemory, Translation, discourse_text, discourses_from_spans
from .ingestion import CorpusError, load_corpus
from .metrics import (
    TermLexicon,
    UndefinedMetricError,
    ZPAnnotation,
    azpt_counts,
    corpus_d_bleu,
    ctt_from_occurrences,
    d_bleu,
    merge_histograms,
    node_consistent,
    path_stats,
    recover_term_translations,
    share_of_paths_within,
)
from .translation import RunRecord

# Paths longer than this are not enumerated by default.
DEFAULT_MAX_PATH_LEN = 12


class MissingArtifactError(FileNotFoundError):
    pass


def _read_json(path: Path) -> Any:
    if not path.exists():
        raise MissingArtifactError(f"missing artifact {path}")
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def load_record(doc_dir: str | Path) -> RunRecord:
    doc_dir = Path(doc_dir)
    config = RunConfig.from_dict(_read_json(doc_dir / "config.json"))
    document = Document.from_dict(_read_json(doc_dir / "source.json"))
    segmentation = discourses_from_spans(_read_json(doc_dir / "segmentation.json"))
    graph = DiscourseGraph.from_dict(_read_json(doc_dir / "graph.json"))
    memories: list[LocalMemory | None] = []
    translations = []
    for d in segmentation:
        mem_path = doc_dir / "memories" / f"{d.index}.json"
        memories.append(LocalMemory.from_dict(_read_json(mem_path)) if mem_path.exists() else None)
        tr_path = doc_dir / "translations" / f"{d.index}.txt"
        if not tr_path.exists():
            raise MissingArtifactError(f"missing artifact {tr_path}")
        translations.append(Translation(d.index, tr_path.read_text(encoding="utf-8").rstrip("\n"), d.span))
    return RunRecord(document, config, segmentation, graph, memories, translations)


def list_documents(run_dir: str | Path) -> list[Path]:
    run_dir = Path(run_dir)
    summary = _read_json(run_dir / "summary.json")
    return [run_dir / entry["dir"] for entry in summary["documents"]]


def load_references(paths: Sequence[str | Path], n_docs: int, target_lang: str) -> list[list[str]]:
    """One list of reference documents per run document. Each path is a
    lines file (blank line between documents) or a jsonl corpus with inline
    references."""
    per_doc: list[list[str]] = [[] for _ in range(n_docs)]
    for path in paths:
        path = Path(path)
        if path.suffix == ".jsonl":
            items = load_corpus(path, "jsonl", target_lang=target_lang)
            refs_by_doc = [list(i.references) for i in items]
        else:
            items = load_corpus(path, "lines", lang=target_lang)
            refs_by_doc = [[i.document.text] for i in items]
        if len(refs_by_doc) != n_docs:
            raise CorpusError(f"{path} has {len(refs_by_doc)} documents, run has {n_docs}")
        for k, refs in enumerate(refs_by_doc):
            per_doc[k].extend(refs)
    return per_doc


def node_consistency_flags(record: RunRecord) -> list[bool]:
    flags = []
    for d, t in zip(record.segmentation, record.translations):
        source = discourse_text(record.document, d)
        flags.append(node_consistent(source, t.target_text, record.incident_memory(d.index)))
    return flags


def _na(reason: str) -> dict[str, Any]:
    return {"value": None, "reason": reason}


def _value(v: float) -> dict[str, Any]:
    return {"value": round(v, 6), "reason": None}


def evaluate_record(
    record: RunRecord,
    references: Sequence[str] = (),
    lexicon: TermLexicon | None = None,
    zp: ZPAnnotation | None = None,
    max_path_len: int | None = DEFAULT_MAX_PATH_LEN,
) -> dict[str, Any]:
    lang = record.config.target_lang
    hyp = record.target_document
    out: dict[str, Any] = {"doc_id": record.document.doc_id}
    out["d_bleu"] = _value(d_bleu(hyp, references, lang)) if references else _na("no references supplied")

    sources = [discourse_text(record.document, d) for d in record.segmentation]
    targets = [t.target_text for t in record.translations]
    occurrences: dict[str, list[str]] = {}
    if lexicon is None:
        out["ctt"] = _na("no terminology lexicon supplied")
    else:
        occurrences = recover_term_translations(sources, targets, lexicon, record.memories)
        try:
            out["ctt"] = _value(ctt_from_occurrences(occurrences))
        except UndefinedMetricError as exc:
            out["ctt"] = _na(str(exc))

    out["_zp"] = (0, 0)
    if zp is None:
        out["azpt"] = _na("no zero-pronoun annotation supplied")
    else:
        doc_zp = zp.for_document(record.document.doc_id)
        accepted, total = azpt_counts(targets, doc_zp, spans=[d.span for d in record.segmentation])
        out["_zp"] = (accepted, total)
        out["azpt"] = _value(accepted / total) if total else _na("no zero pronouns annotated; aZPT is undefined")
    out["_occurrences"] = occurrences

    stats = path_stats(record.graph, max_path_len, node_consistency_flags(record))
    out["paths"] = stats.to_dict()
    return out


def evaluate_run(
    run_dir: str | Path,
    reference_paths: Sequence[str | Path] = (),
    lexicon: TermLexicon | None = None,
    zp: ZPAnnotation | None = None,
    max_path_len: int | None = DEFAULT_MAX_PATH_LEN,
) -> dict[str, Any]:
    doc_dirs = list_documents(run_dir)
    records = [load_record(d) for d in doc_dirs]
    if not records:
        raise MissingArtifactError(f"{run_dir} has no documents")
    lang = records[0].config.target_lang
    refs = load_references(reference_paths, len(records), lang) if reference_paths else [[] for _ in records]
    docs = [evaluate_record(r, rf, lexicon, zp, max_path_len) for r, rf in zip(records, refs)]

    corpus: dict[str, Any] = {}
    if reference_paths:
        corpus["d_bleu"] = _value(corpus_d_bleu([r.target_document for r in records], refs, lang).score)
    else:
        corpus["d_bleu"] = _na("no references supplied")

    if lexicon is None:
        corpus["ctt"] = _na("no terminology lexicon supplied")
    else:
        pooled: dict[str, list[str]] = {}
        for k, d in enumerate(docs):
            for term, occ in d["_occurrences"].items():
                pooled[f"{k}:{term}"] = occ
        try:
            corpus["ctt"] = _value(ctt_from_occurrences(pooled))
        except UndefinedMetricError as exc:
            corpus["ctt"] = _na(str(exc))

    n_zp = sum(d["_zp"][1] for d in docs)
    if zp is None:
        corpus["azpt"] = _na("no zero-pronoun annotation supplied")
    elif n_zp == 0:
        corpus["azpt"] = _na("no zero pronouns annotated; aZPT is undefined")
    else:
        corpus["azpt"] = _value(sum(d["_zp"][0] for d in docs) / n_zp)

    length_hist = merge_histograms({int(k): v for k, v in d["paths"]["length_histogram"].items()} for d in docs)
    cr_hist = merge_histograms(d["paths"]["cr_histogram"] for d in docs)
    n_paths = sum(d["paths"]["paths"] for d in docs)
    corpus["paths"] = {
        "paths": n_paths,
        "length_histogram": {str(k): v for k, v in length_hist.items()},
        "cr_histogram": cr_hist,
        "share_length_2_to_5": (
            round(sum(v for k, v in length_hist.items() if 2 <= k <= 5) / n_paths, 6) if n_paths else None
        ),
        "share_cr_above_0_6": (
            round(sum(v for k, v in cr_hist.items() if float(k) > 0.6) / n_paths, 6) if n_paths else None
        ),
    }
    for d in docs:
        d.pop("_zp")
        d.pop("_occurrences")
    return {"documents": docs, "corpus": corpus, "max_path_len": max_path_len,
            "bleu": {"ngram_order": 4, "smoothing": "floor", "epsilon": 0.1, "unit": "document"}}


def _fmt(metric: dict[str, Any]) -> str:
    return "n/a" if metric["value"] is None else f"{metric['value']:.4f}"


def report_markdown(report: dict[str, Any]) -> str:
    b = report["bleu"]
    lines = [
        "# Metrics report",
        "",
        f"d-BLEU: n-grams 1..{b['ngram_order']}, zero-match precision floored at "
        f"{b['epsilon']} counts, one segment per document.",
        "",
        "| document | d-BLEU | cTT | aZPT | paths |",
        "|---|---|---|---|---|",
    ]
    for d in report["documents"]:
        lines.append(
            f"| {d['doc_id']} | {_fmt(d['d_bleu'])} | {_fmt(d['ctt'])} | {_fmt(d['azpt'])} | {d['paths']['paths']} |"
        )
    c = report["corpus"]
    lines.append(f"| **corpus** | {_fmt(c['d_bleu'])} | {_fmt(c['ctt'])} | {_fmt(c['azpt'])} | {c['paths']['paths']} |")
    reasons = [
        f"- {name}: {c[name]['reason']}" for name in ("d_bleu", "ctt", "azpt") if c[name]["value"] is None
    ]
    if reasons:
        lines += ["", "Undefined metrics:", *reasons]
    lines += ["", "## Path lengths (nodes)", "", "| length | paths |", "|---|---|"]
    lines += [f"| {k} | {v} |" for k, v in c["paths"]["length_histogram"].items()]
    lines += ["", "## Consistency ratio", "", "| CR | paths |", "|---|---|"]
    lines += [f"| {k} | {v} |" for k, v in c["paths"]["cr_histogram"].items()]
    return "\n".join(lines) + "\n"


@dataclass
class GraphStats:
    discourses_per_document: dict[int, int]
    sentences_per_discourse: dict[int, int]
    edges_per_document: dict[int, int]
    non_consecutive_edges_per_document: dict[int, int]
    path_lengths: dict[int, int]
    non_consecutive_edges_total: int

    def to_dict(self) -> dict[str, Any]:
        def keyed(h):
            return {str(k): v for k, v in sorted(h.items())}

        return {
            "discourses_per_document": keyed(self.discourses_per_document),
            "sentences_per_discourse": keyed(self.sentences_per_discourse),
            "edges_per_document": keyed(self.edges_per_document),
            "non_consecutive_edges_per_document": keyed(self.non_consecutive_edges_per_document),
            "path_lengths": keyed(self.path_lengths),
            "non_consecutive_edges_total": self.non_consecutive_edges_total,
        }


def graph_stats(run_dir: str | Path, max_path_len: int | None = DEFAULT_MAX_PATH_LEN) -> GraphStats:
    disc, sents, edges, nonc, paths = Counter(), Counter(), Counter(), Counter(), Counter()
    total_nonc = 0
    for doc_dir in list_documents(run_dir):
        segs: list[Discourse] = discourses_from_spans(_read_json(doc_dir / "segmentation.json"))
        g = DiscourseGraph.from_dict(_read_json(doc_dir / "graph.json"))
        disc[len(segs)] += 1
        sents.update(len(d) for d in segs)
        edges[len(g.edges)] += 1
        n = len(g.non_consecutive_edges())
        nonc[n] += 1
        total_nonc += n
        paths.update(path_stats(g, max_path_len).length_histogram)
    return GraphStats(dict(disc), dict(sents), dict(edges), dict(nonc), dict(paths), total_nonc)


def format_graph_stats(stats: GraphStats) -> str:
    out = []
    for name, hist in stats.to_dict().items():
        if isinstance(hist, dict):
            body = ", ".join(f"{k}:{v}" for k, v in hist.items()) or "(empty)"
            out.append(f"{name}: {body}")
        else:
            out.append(f"{name}: {hist}")
    return "\n".join(out)


__all__ = [
    "evaluate_run",
    "evaluate_record",
    "graph_stats",
    "load_record",
    "report_markdown",
    "share_of_paths_within",
]
