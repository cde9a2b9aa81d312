"""Memory agent: extracting local memory from a translated discourse and
merging predecessor memories into the incident memory of a node."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import MAP_COMPONENTS, MEMORY_COMPONENTS, LocalMemory
from .llm.agents import AgentSettings
from .llm.gateway import MEMORY_PREFIX, BatchError, ChatRequest, Session
from .llm.parsing import ParseError, parse_json_map, parse_summary
from .llm.prompts import JSON_REASK, LINE_REASK, PromptLibrary, language_slots, render

SUMMARY_DELIMITER = " | "
DEFAULT_SUMMARY_CAP = 5


class MemoryExtractionError(RuntimeError):
    def __init__(self, component: str, cause: Exception):
        super().__init__(f"memory component {component!r}: {cause}")
        self.component = component
        self.cause = cause


@dataclass(frozen=True)
class MemoryFlags:
    noun_pronoun: bool = True
    entities: bool = True
    phrases: bool = True
    connectives: bool = True
    summary: bool = True

    @classmethod
    def none(cls) -> "MemoryFlags":
        return cls(False, False, False, False, False)

    @classmethod
    def from_dict(cls, data: Mapping[str, bool]) -> "MemoryFlags":
        unknown = set(data) - set(MEMORY_COMPONENTS)
        if unknown:
            raise ValueError(f"unknown memory components {sorted(unknown)}")
        return cls(**{k: bool(v) for k, v in data.items()})

    def enabled(self) -> list[str]:
        return [c for c in MEMORY_COMPONENTS if getattr(self, c)]

    def to_dict(self) -> dict[str, bool]:
        return {c: getattr(self, c) for c in MEMORY_COMPONENTS}


def _parser(component: str):
    if component == "summary":
        return lambda text: parse_summary(text, component)
    return lambda text: parse_json_map(text, component)


def extract(
    source_text: str,
    target_text: str,
    lang_pair: tuple[str, str],
    session: Session,
    settings: AgentSettings = AgentSettings(),
    flags: MemoryFlags = MemoryFlags(),
    prompts: PromptLibrary | None = None,
) -> LocalMemory:
    """One model call per enabled component; disabled components stay empty
    and cost nothing."""
    if not source_text or not target_text:
        raise ValueError("memory extraction needs non-empty source and translation")
    components = flags.enabled()
    if not components:
        return LocalMemory()
    prompts = prompts or PromptLibrary()
    slots = {**language_slots(*lang_pair), "source": source_text, "translation": target_text}
    reqs = [
        ChatRequest(
            MEMORY_PREFIX + c,
            render(prompts.memory[c], slots),
            settings.model_name,
            settings.temperature,
        )
        for c in components
    ]
    try:
        responses = session.complete_many(reqs, settings.workers)
    except BatchError as exc:
        raise MemoryExtractionError(components[exc.index], exc.cause) from exc.cause

    values: dict[str, object] = {}
    for component, req, resp in zip(components, reqs, responses):
        parse = _parser(component)
        try:
            values[component] = parse(resp.text)
        except ParseError:
            suffix = LINE_REASK if component == "summary" else JSON_REASK
            retry = ChatRequest(req.agent_kind, req.rendered_prompt + suffix, req.model_name, req.temperature)
            try:
                values[component] = parse(session.complete(retry).text)
            except Exception as exc:
                raise MemoryExtractionError(component, exc) from exc
    return LocalMemory(**values)


def aggregate(
    preds: Sequence[LocalMemory],
    pred_indices: Sequence[int] | None = None,
    summary_cap: int | None = DEFAULT_SUMMARY_CAP,
) -> LocalMemory:
    """Merge predecessor memories, earliest first. For each map component
    the first binding of a key wins; summaries are joined in order, keeping
    at most ``summary_cap`` of the earliest non-empty ones."""
    if pred_indices is not None:
        if len(pred_indices) != len(preds):
            raise ValueError("pred_indices and preds differ in length")
        if list(pred_indices) != sorted(set(pred_indices)):
            raise ValueError(f"predecessors must be in ascending index order, got {list(pred_indices)}")
    if len(preds) == 1:
        return preds[0]
    merged: dict[str, dict[str, str]] = {c: {} for c in MAP_COMPONENTS}
    summaries: list[str] = []
    for mem in preds:
        for c in MAP_COMPONENTS:
            target = merged[c]
            for key, value in getattr(mem, c).items():
                target.setdefault(key, value)
        if mem.summary:
            summaries.append(mem.summary)
    if summary_cap is not None:
        summaries = summaries[:summary_cap]
    return LocalMemory(**merged, summary=SUMMARY_DELIMITER.join(summaries))
