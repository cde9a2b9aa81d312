"""Building the discourse dependency graph and querying it."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Discourse, DiscourseGraph, Document, discourse_text
from .llm.agents import AgentSettings
from .llm.gateway import EDGE, BatchError, ChatRequest, Session
from .llm.parsing import ParseError, parse_binary
from .llm.prompts import BINARY_REASK, PromptLibrary, language_slots, render
from .tfidf import cosine_matrix, tfidf_matrix

KINDS = ("llm", "chain", "tfidf")


class EdgeQueryError(RuntimeError):
    def __init__(self, pair: tuple[int, int], cause: Exception):
        super().__init__(f"edge query {pair[0]}->{pair[1]} failed: {cause}")
        self.pair = pair
        self.cause = cause


@dataclass(frozen=True)
class EdgeStrategy:
    kind: str = "llm"
    tau: float = 0.3
    window: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"edge kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.window is not None and self.window < 2:
            raise ValueError("window must be >= 2 (or null for unlimited)")


def chain_edges(k: int) -> set[tuple[int, int]]:
    return {(i - 1, i) for i in range(1, k)}


def candidate_pairs(k: int, window: int | None = None) -> list[tuple[int, int]]:
    """Non-adjacent forward pairs (j, i), ordered by target then source."""
    return [
        (j, i)
        for i in range(2, k)
        for j in range(0, i - 1)
        if window is None or i - j <= window
    ]


def build_chain(segments: Sequence[Discourse]) -> DiscourseGraph:
    return DiscourseGraph(tuple(segments), frozenset(chain_edges(len(segments))))


def build_llm(
    doc: Document,
    segments: Sequence[Discourse],
    session: Session,
    settings: AgentSettings = AgentSettings(),
    target_language: str = "de",
    prompts: PromptLibrary | None = None,
    window: int | None = None,
) -> DiscourseGraph:
    """Chain edges plus every non-adjacent pair the relevance agent accepts.
    Pair queries are independent and go out together; the edge set does not
    depend on completion order."""
    prompts = prompts or PromptLibrary()
    lang = language_slots(doc.language, target_language)
    texts = [discourse_text(doc, d) for d in segments]
    pairs = candidate_pairs(len(segments), window)
    reqs = [
        ChatRequest(
            EDGE,
            render(prompts.edge, {**lang, "earlier": texts[j], "later": texts[i]}),
            settings.model_name,
            settings.temperature,
        )
        for j, i in pairs
    ]
    try:
        responses = session.complete_many(reqs, settings.workers)
    except BatchError as exc:
        raise EdgeQueryError(pairs[exc.index], exc.cause) from exc.cause

    edges = chain_edges(len(segments))
    for pair, req, resp in zip(pairs, reqs, responses):
        try:
            relevant = parse_binary(resp.text)
        except ParseError:
            retry = ChatRequest(EDGE, req.rendered_prompt + BINARY_REASK, req.model_name, req.temperature)
            try:
                relevant = parse_binary(session.complete(retry).text)
            except Exception as exc:
                raise EdgeQueryError(pair, exc) from exc
        if relevant:
            edges.add(pair)
    return DiscourseGraph(tuple(segments), frozenset(edges))


def build_tfidf(
    doc: Document,
    segments: Sequence[Discourse],
    tau: float = 0.3,
    window: int | None = None,
) -> DiscourseGraph:
    """Chain edges plus non-adjacent pairs whose TF-IDF cosine exceeds tau;
    the vectorizer is fitted on this document's discourses only."""
    sims = cosine_matrix(tfidf_matrix([discourse_text(doc, d) for d in segments]))
    edges = chain_edges(len(segments))
    edges.update(p for p in candidate_pairs(len(segments), window) if sims[p[0], p[1]] > tau)
    return DiscourseGraph(tuple(segments), frozenset(edges))


def build_graph(
    doc: Document,
    segments: Sequence[Discourse],
    strategy: EdgeStrategy,
    session: Session | None = None,
    settings: AgentSettings = AgentSettings(),
    target_language: str = "de",
    prompts: PromptLibrary | None = None,
) -> DiscourseGraph:
    if strategy.kind == "chain":
        return build_chain(segments)
    if strategy.kind == "tfidf":
        return build_tfidf(doc, segments, strategy.tau, strategy.window)
    if session is None:
        raise ValueError("LLM edge construction needs a gateway session")
    return build_llm(doc, segments, session, settings, target_language, prompts, strategy.window)


def predecessors(g: DiscourseGraph, i: int) -> list[int]:
    if not 0 <= i < g.size:
        raise IndexError(f"node {i} not in graph of {g.size} nodes")
    return sorted(j for j, t in g.edges if t == i)


def successors(g: DiscourseGraph, j: int) -> list[int]:
    if not 0 <= j < g.size:
        raise IndexError(f"node {j} not in graph of {g.size} nodes")
    return sorted(i for s, i in g.edges if s == j)


def enumerate_paths(g: DiscourseGraph, max_len: int | None = None) -> list[tuple[int, ...]]:
    """Every directed path with 2..max_len nodes (no limit when None),
    in lexicographic order."""
    if max_len is not None and max_len < 2:
        raise ValueError("max_len must be >= 2")
    limit = g.size if max_len is None else max_len
    out_edges = {j: successors(g, j) for j in range(g.size)}
    paths: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = [(v,) for v in reversed(range(g.size))]
    while stack:
        path = stack.pop()
        if len(path) >= 2:
            paths.append(path)
        if len(path) < limit:
            stack.extend(path + (w,) for w in reversed(out_edges[path[-1]]))
    return paths
