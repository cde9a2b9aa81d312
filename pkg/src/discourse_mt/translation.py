"""Translation agent and the per-document pipeline.

``run_pipeline`` segments the document and builds the dependency graph.
Discourses are then visited in index order, which is topological because
every edge points forward. Each one is translated with the merged memory
of its predecessors before its own memory is extracted.
"""
from __future__ import annotations

import json
import logging
import os
import re
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .config import RunConfig
from .core import (
    Discourse,
    DiscourseGraph,
    Document,
    LocalMemory,
    Translation,
    assemble,
    discourse_text,
    validate_segmentation,
)
from .graph import build_chain, build_graph, predecessors
from .llm.agents import AgentSettings
from .llm.gateway import (
    TRANSLATION,
    CallRecord,
    ChatRequest,
    Gateway,
    HttpBackend,
    MockBackend,
    ResponseCache,
    agent_group,
    call_log_dicts,
    summarize_calls,
)
from .llm.prompts import PromptLibrary, language_slots, render, render_memory
from .memory import MemoryFlags, aggregate, extract
from .segmentation import segment

logger = logging.getLogger(__name__)


class TranslationError(RuntimeError):
    pass


class PipelineError(RuntimeError):
    """A stage failed; ``record`` holds everything produced before it."""

    def __init__(self, stage: str, node: int | None, cause: Exception, record: "RunRecord"):
        where = f"{stage}" if node is None else f"{stage} (node {node})"
        super().__init__(f"document {record.document.doc_id!r}: {where} failed: {cause}")
        self.stage = stage
        self.node = node
        self.cause = cause
        self.record = record


def translate_discourse(
    d_text: str,
    mem_inc: LocalMemory,
    lang_pair: tuple[str, str],
    session,
    settings: AgentSettings = AgentSettings(),
    prompts: PromptLibrary | None = None,
    discourse_index: int = 0,
    source_span: tuple[int, int] = (0, 0),
) -> Translation:
    prompt = translation_prompt(d_text, mem_inc, lang_pair, prompts)
    text = session.complete(ChatRequest(TRANSLATION, prompt, settings.model_name, settings.temperature)).text
    text = text.strip()
    if not text:
        raise TranslationError(f"empty translation for discourse {discourse_index}")
    return Translation(discourse_index, text, source_span)


def translation_prompt(
    d_text: str,
    mem_inc: LocalMemory,
    lang_pair: tuple[str, str],
    prompts: PromptLibrary | None = None,
) -> str:
    if not d_text:
        raise ValueError("nothing to translate")
    prompts = prompts or PromptLibrary()
    slots = {**language_slots(*lang_pair), "memory_section": render_memory(mem_inc), "source": d_text}
    return render(prompts.translation, slots)


@dataclass(frozen=True)
class Stages:
    """Which agents a profile runs."""

    segment: bool
    edges: bool
    memory: bool

    @classmethod
    def for_profile(cls, ablation: str) -> "Stages":
        return {
            "ta_only": cls(segment=False, edges=False, memory=False),
            "ta_da": cls(segment=True, edges=False, memory=False),
            "ta_da_ma": cls(segment=True, edges=False, memory=True),
            "full": cls(segment=True, edges=True, memory=True),
            "custom": cls(segment=True, edges=True, memory=True),
        }[ablation]


@dataclass
class RunRecord:
    document: Document
    config: RunConfig
    segmentation: list[Discourse] = field(default_factory=list)
    graph: DiscourseGraph | None = None
    memories: list[LocalMemory | None] = field(default_factory=list)
    translations: list[Translation] = field(default_factory=list)
    calls: list[CallRecord] = field(default_factory=list)
    error: dict[str, Any] | None = None

    @property
    def complete(self) -> bool:
        return self.error is None and bool(self.segmentation) and len(self.translations) == len(self.segmentation)

    @property
    def target_document(self) -> str:
        return assemble(self.translations, self.config.target_lang)

    def incident_memory(self, i: int) -> LocalMemory:
        if self.graph is None:
            return LocalMemory()
        preds = predecessors(self.graph, i)
        mems = [self.memories[j] for j in preds if j < len(self.memories) and self.memories[j] is not None]
        if not mems:
            return LocalMemory()
        return aggregate(mems, summary_cap=self.config.summary_cap)

    def accounting(self) -> dict[str, Any]:
        summary = summarize_calls(self.calls)
        groups: dict[str, int] = {"segmentation": 0, "edge": 0, "translation": 0, "memory": 0}
        for c in self.calls:
            groups[agent_group(c.agent_kind)] += 1
        total = summary["total"]
        pricing = self.config.pricing
        return {
            "doc_id": self.document.doc_id,
            "sentences": len(self.document),
            "discourses": len(self.segmentation),
            "calls_by_group": groups,
            **summary,
            "estimated_cost": round(pricing.cost(total["prompt_tokens"], total["completion_tokens"]), 8),
            "currency": pricing.currency,
        }


def _settings(config: RunConfig) -> AgentSettings:
    return AgentSettings(config.model_name, config.temperature, config.agent_workers)


def run_pipeline(
    doc: Document,
    config: RunConfig,
    gateway: Gateway,
    prompts: PromptLibrary | None = None,
) -> RunRecord:
    prompts = prompts or PromptLibrary()
    session = gateway.session(doc.doc_id)
    record = RunRecord(doc, config, calls=session.calls)
    settings = _settings(config)
    stages = Stages.for_profile(config.ablation)
    flags = config.memory if stages.memory else MemoryFlags.none()
    stage, node = "segmentation", None
    try:
        if stages.segment:
            record.segmentation = segment(
                doc, config.segmentation, session, settings, config.target_lang, prompts
            )
        else:
            record.segmentation = [Discourse(0, 0, len(doc) - 1)]
        validate_segmentation(doc, record.segmentation)

        stage = "graph"
        if stages.edges:
            record.graph = build_graph(
                doc, record.segmentation, config.edges, session, settings, config.target_lang, prompts
            )
        else:
            record.graph = build_chain(record.segmentation)

        for d in record.segmentation:
            node = d.index
            stage = "translation"
            source = discourse_text(doc, d)
            mem_inc = record.incident_memory(d.index) if stages.memory else LocalMemory()
            tau = translate_discourse(
                source, mem_inc, config.lang_pair, session, settings, prompts, d.index, d.span
            )
            record.translations.append(tau)
            stage = "memory"
            if flags.enabled():
                record.memories.append(
                    extract(source, tau.target_text, config.lang_pair, session, settings, flags, prompts)
                )
            else:
                record.memories.append(None)
    except Exception as exc:
        record.error = {"stage": stage, "node": node, "type": type(exc).__name__, "message": str(exc)}
        raise PipelineError(stage, node, exc, record) from exc
    return record


def _dump(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8") as f:
        f.write(text)
    os.replace(tmp, path)


def safe_name(doc_id: str) -> str:
    name = re.sub(r"[^A-Za-z0-9._-]+", "_", doc_id).strip("._")
    return name or "doc"


def write_run_dir(record: RunRecord, path: str | Path) -> Path:
    """Persist a record, partial ones included, with one file per artifact
    (the README lists the layout). Failed runs also get error.json."""
    path = Path(path)
    if path.exists():
        shutil.rmtree(path)
    path.mkdir(parents=True)
    _write(path / "config.json", _dump(record.config.to_dict()))
    _write(path / "source.json", _dump(record.document.to_dict()))
    if record.segmentation:
        _write(path / "segmentation.json", _dump([d.to_dict() for d in record.segmentation]))
    if record.graph is not None:
        _write(path / "graph.json", _dump(record.graph.to_dict()))
    for i, mem in enumerate(record.memories):
        if mem is not None:
            _write(path / "memories" / f"{i}.json", _dump(mem.to_dict()))
    for t in record.translations:
        _write(path / "translations" / f"{t.discourse_index}.txt", t.target_text + "\n")
    if record.complete:
        _write(path / "document.txt", record.target_document + "\n")
    _write(path / "accounting.json", _dump(record.accounting()))
    _write(path / "calls.json", _dump(call_log_dicts(record.calls)))
    if record.error is not None:
        _write(path / "error.json", _dump(record.error))
    return path


def make_gateway(config: RunConfig, cache_dir: str | Path | None = None, sleep=time.sleep) -> Gateway:
    be = config.backend
    if be.kind == "mock":
        if not be.mock_script:
            raise ValueError("backend.mock_script is required for the mock backend")
        backend = MockBackend.from_file(be.mock_script)
    else:
        if not be.url:
            raise ValueError("backend.url is required for the http backend")
        backend = HttpBackend(be.url, be.api_key_env, be.timeout)
    cache = None
    if config.cache:
        cache = ResponseCache(config.cache_dir or cache_dir)
    return Gateway(backend, cache, retries=be.retries, backoff=be.backoff, sleep=sleep)


@dataclass
class CorpusResult:
    records: list[RunRecord]
    failures: list[PipelineError]
    summary: dict[str, Any]
    wall_time: float


def run_corpus(
    docs: Sequence[Document],
    config: RunConfig,
    gateway: Gateway,
    out_dir: str | Path | None = None,
    prompts: PromptLibrary | None = None,
) -> CorpusResult:
    """Run every document (``config.workers`` at a time) and, with
    ``out_dir``, write ``docs/<doc_id>/`` per document plus summary.json."""
    names = [safe_name(d.doc_id) for d in docs]
    if len(set(names)) != len(names):
        raise ValueError("document ids collide after sanitising; make them unique")
    start = time.perf_counter()

    def one(doc: Document) -> RunRecord | PipelineError:
        try:
            return run_pipeline(doc, config, gateway, prompts)
        except PipelineError as exc:
            logger.error("%s", exc)
            return exc

    if config.workers > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(one, docs))
    else:
        outcomes = [one(d) for d in docs]
    wall = time.perf_counter() - start

    records = [o.record if isinstance(o, PipelineError) else o for o in outcomes]
    failures = [o for o in outcomes if isinstance(o, PipelineError)]
    summary = corpus_summary(records, config)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, rec in zip(names, records):
            write_run_dir(rec, out / "docs" / name)
        _write(out / "config.json", _dump(config.to_dict()))
        _write(out / "summary.json", _dump(summary))
    return CorpusResult(records, failures, summary, wall)


def corpus_summary(records: Sequence[RunRecord], config: RunConfig) -> dict[str, Any]:
    per_doc = [r.accounting() for r in records]
    total = summarize_calls(c for r in records for c in r.calls)["total"]
    groups = {"segmentation": 0, "edge": 0, "translation": 0, "memory": 0}
    for acc in per_doc:
        for k, v in acc["calls_by_group"].items():
            groups[k] += v
    return {
        "documents": [
            {"doc_id": r.document.doc_id, "dir": f"docs/{safe_name(r.document.doc_id)}", "complete": r.complete}
            for r in records
        ],
        "per_document": per_doc,
        "total": total,
        "calls_by_group": groups,
        "estimated_cost": round(config.pricing.cost(total["prompt_tokens"], total["completion_tokens"]), 8),
        "currency": config.pricing.currency,
    }
