"""Data model shared by every stage, from documents and discourse spans
up to the dependency graph and what each node produces.

All types are frozen and serialize to plain JSON via ``to_dict`` /
``from_dict``; those dicts are the on-disk format of a run directory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

# Languages written without inter-word spaces; their text is joined with "".
SPACELESS_LANGUAGES = frozenset({"zh", "ja", "th", "lo", "km", "my"})


class RangeError(IndexError):
    """A sentence span falls outside its document."""


class SegmentationError(ValueError):
    """A list of discourses is not a partition of the document."""


class GraphError(ValueError):
    """A discourse graph violates its structural invariants."""


class AssemblyError(ValueError):
    """Translations cannot be stitched into a target document."""


def base_language(tag: str) -> str:
    return tag.replace("_", "-").split("-")[0].lower()


def joiner_for(language: str) -> str:
    """Separator used between sentences and between translated segments."""
    return "" if base_language(language) in SPACELESS_LANGUAGES else " "


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"sentence index must be >= 0, got {self.index}")
        if not self.text or self.text != self.text.strip():
            raise ValueError(f"sentence {self.index} is empty or has surrounding whitespace")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"sentence {self.index} contains a newline")


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]
    language: str = "en"

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.sentences:
            raise ValueError(f"document {self.doc_id!r} has no sentences")
        for expected, sent in enumerate(self.sentences):
            if sent.index != expected:
                raise ValueError(
                    f"document {self.doc_id!r}: sentence index {sent.index} at position {expected}"
                )

    @classmethod
    def from_texts(cls, doc_id: str, texts: Iterable[str], language: str = "en") -> "Document":
        return cls(doc_id, tuple(Sentence(i, t) for i, t in enumerate(texts)), language)

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]

    @property
    def text(self) -> str:
        return joiner_for(self.language).join(self.texts)

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "language": self.language, "sentences": self.texts}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Document":
        return cls.from_texts(data["doc_id"], data["sentences"], data.get("language", "en"))


@dataclass(frozen=True, order=True)
class Discourse:
    index: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError(f"invalid discourse span ({self.lo}, {self.hi})")

    @property
    def span(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def to_dict(self) -> list[int]:
        return [self.lo, self.hi]


def discourses_from_spans(spans: Iterable[Sequence[int]]) -> list[Discourse]:
    return [Discourse(k, int(lo), int(hi)) for k, (lo, hi) in enumerate(spans)]


def discourses_from_boundaries(n: int, starts: Iterable[int]) -> list[Discourse]:
    """Build a segmentation of ``n`` sentences from the sentence indices that
    open a new discourse (index 0 is implied)."""
    cuts = sorted(set(starts) | {0})
    if cuts[-1] >= n:
        raise SegmentationError(f"boundary {cuts[-1]} outside document of {n} sentences")
    ends = cuts[1:] + [n]
    return [Discourse(k, lo, hi - 1) for k, (lo, hi) in enumerate(zip(cuts, ends))]


def validate_segmentation(doc: Document | int, discourses: Sequence[Discourse]) -> None:
    """Raise SegmentationError unless ``discourses`` partitions the document
    into contiguous spans in document order."""
    n = doc if isinstance(doc, int) else len(doc)
    if not discourses:
        raise SegmentationError("empty segmentation")
    expected_lo = 0
    for k, d in enumerate(discourses):
        if d.index != k:
            raise SegmentationError(f"discourse at position {k} has index {d.index}")
        if d.lo != expected_lo:
            raise SegmentationError(f"discourse {k} starts at {d.lo}, expected {expected_lo}")
        if d.hi < d.lo:
            raise SegmentationError(f"discourse {k} has hi < lo")
        expected_lo = d.hi + 1
    if expected_lo != n:
        raise SegmentationError(f"segmentation covers {expected_lo} of {n} sentences")


def discourse_text(doc: Document, d: Discourse) -> str:
    if d.lo < 0 or d.hi >= len(doc) or d.lo > d.hi:
        raise RangeError(f"span ({d.lo}, {d.hi}) outside document of {len(doc)} sentences")
    return joiner_for(doc.language).join(s.text for s in doc.sentences[d.lo : d.hi + 1])


@dataclass(frozen=True)
class DiscourseGraph:
    """DAG over discourse indices. Every edge points forward, so index order
    is a topological order, and every adjacent pair carries a chain edge."""

    nodes: tuple[Discourse, ...]
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))
        k = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.index != i:
                raise GraphError(f"node at position {i} has index {node.index}")
        for j, i in self.edges:
            if not 0 <= j < i < k:
                raise GraphError(f"edge ({j}, {i}) is not a forward edge among {k} nodes")
        missing = [(i - 1, i) for i in range(1, k) if (i - 1, i) not in self.edges]
        if missing:
            raise GraphError(f"missing chain edges {missing}")

    @property
    def size(self) -> int:
        return len(self.nodes)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges, key=lambda e: (e[1], e[0]))

    def non_consecutive_edges(self) -> list[tuple[int, int]]:
        return [(j, i) for j, i in self.sorted_edges() if i - j > 1]

    def to_dict(self) -> dict:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "edges": [list(e) for e in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DiscourseGraph":
        return cls(
            tuple(discourses_from_spans(data["nodes"])),
            frozenset(tuple(e) for e in data["edges"]),
        )


MEMORY_COMPONENTS = ("noun_pronoun", "entities", "phrases", "connectives", "summary")
MAP_COMPONENTS = MEMORY_COMPONENTS[:4]


def _frozen_map(name: str, items: Mapping[str, str] | Iterable[tuple[str, str]]) -> Mapping[str, str]:
    pairs = items.items() if isinstance(items, Mapping) else items
    out: dict[str, str] = {}
    for key, value in pairs:
        if not isinstance(key, str) or not key:
            raise ValueError(f"{name}: keys must be non-empty strings")
        if not isinstance(value, str):
            raise ValueError(f"{name}: value for {key!r} is not a string")
        out[key] = value
    return MappingProxyType(out)


@dataclass(frozen=True)
class LocalMemory:
    """What one translated discourse established. The four maps named in
    MAP_COMPONENTS record source-to-target choices; ``summary`` is a
    one-line target-language summary."""

    noun_pronoun: Mapping[str, str] = field(default_factory=dict)
    entities: Mapping[str, str] = field(default_factory=dict)
    phrases: Mapping[str, str] = field(default_factory=dict)
    connectives: Mapping[str, str] = field(default_factory=dict)
    summary: str = ""

    def __post_init__(self):
        for name in MAP_COMPONENTS:
            object.__setattr__(self, name, _frozen_map(name, getattr(self, name)))
        if "\n" in self.summary or "\r" in self.summary:
            raise ValueError("summary must be a single line")

    def is_empty(self) -> bool:
        return not self.summary and not any(getattr(self, c) for c in MAP_COMPONENTS)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {c: dict(getattr(self, c)) for c in MAP_COMPONENTS}
        out["summary"] = self.summary
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LocalMemory":
        return cls(**{c: data.get(c, {}) for c in MAP_COMPONENTS}, summary=data.get("summary", ""))


@dataclass(frozen=True)
class Translation:
    discourse_index: int
    target_text: str
    source_span: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "source_span", tuple(self.source_span))
        if not self.target_text:
            raise ValueError(f"empty translation for discourse {self.discourse_index}")

    def to_dict(self) -> dict:
        return {
            "discourse_index": self.discourse_index,
            "target_text": self.target_text,
            "source_span": list(self.source_span),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Translation":
        return cls(data["discourse_index"], data["target_text"], tuple(data["source_span"]))


def assemble(translations: Sequence[Translation], language: str = "en") -> str:
    """Concatenate per-discourse translations in discourse order."""
    indices = [t.discourse_index for t in translations]
    if len(set(indices)) != len(indices):
        raise AssemblyError(f"duplicate discourse index in {indices}")
    if indices != list(range(len(indices))):
        raise AssemblyError(f"translations must cover discourses 0..K-1 in order, got {indices}")
    return joiner_for(language).join(t.target_text for t in translations)
