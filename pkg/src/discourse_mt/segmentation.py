"""Splitting a document into contiguous discourses.

The LLM decision loop is the main strategy. Two baselines need no model:
seeded random boundaries, and breaks where sentence embeddings diverge.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Discourse, Document, discourses_from_boundaries, joiner_for
from .llm.agents import AgentSettings, ask_binary
from .llm.gateway import SEGMENTATION, Session
from .llm.prompts import PromptLibrary, language_slots, render
from .tfidf import cosine, tfidf_embedder

Embedder = Callable[[Sequence[str]], np.ndarray]

KINDS = ("llm", "random", "semantic")


@dataclass(frozen=True)
class SegmentationStrategy:
    kind: str = "llm"
    seed: int = 0
    threshold: float = 0.2
    window: int = 1
    max_sentences: int = 40

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"segmentation kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.max_sentences < 1:
            raise ValueError("max_sentences must be >= 1")


def segment_llm(
    doc: Document,
    session: Session,
    settings: AgentSettings = AgentSettings(),
    target_language: str = "de",
    prompts: PromptLibrary | None = None,
    max_sentences: int = 40,
) -> list[Discourse]:
    """Grow the current discourse sentence by sentence while the model says
    the next sentence belongs to it; a "no" closes the discourse and the
    sentence opens the next one. A discourse that reaches ``max_sentences``
    is closed without asking."""
    prompts = prompts or PromptLibrary()
    lang = language_slots(doc.language, target_language)
    join = joiner_for(doc.language)
    texts = doc.texts
    starts = [0]
    for i in range(1, len(texts)):
        lo = starts[-1]
        if i - lo >= max_sentences:
            starts.append(i)
            continue
        prompt = render(
            prompts.segmentation,
            {**lang, "current": join.join(texts[lo:i]), "sentence": texts[i]},
        )
        if not ask_binary(session, SEGMENTATION, prompt, settings):
            starts.append(i)
    return discourses_from_boundaries(len(texts), starts)


def segment_random(doc: Document, seed: int | None = 0) -> list[Discourse]:
    """Draw a boundary count uniformly from 0..floor(n/3), then that many
    distinct boundary positions."""
    n = len(doc)
    rng = random.Random(seed)
    k = rng.randint(0, n // 3)
    starts = rng.sample(range(1, n), k) if k else []
    return discourses_from_boundaries(n, starts)


def breaks_from_similarities(similarities: Sequence[float], threshold: float) -> list[int]:
    """Sentence indices that open a new discourse: sentence i+1 starts one
    whenever similarities[i] (between i+1 and its context) < threshold."""
    return [i + 1 for i, s in enumerate(similarities) if s < threshold]


def adjacent_similarities(vectors: np.ndarray, window: int = 1) -> list[float]:
    """Cosine between each sentence and the mean of the ``window`` sentences
    before it."""
    sims = []
    for i in range(1, len(vectors)):
        context = vectors[max(0, i - window) : i].mean(axis=0)
        sims.append(cosine(vectors[i], context))
    return sims


def segment_semantic(
    doc: Document,
    embedder: Embedder | None = None,
    threshold: float = 0.2,
    window: int = 1,
) -> list[Discourse]:
    vectors = np.asarray((embedder or tfidf_embedder)(doc.texts), dtype=float)
    if vectors.shape[0] != len(doc):
        raise ValueError(f"embedder returned {vectors.shape[0]} vectors for {len(doc)} sentences")
    sims = adjacent_similarities(vectors, window)
    return discourses_from_boundaries(len(doc), breaks_from_similarities(sims, threshold))


def segment(
    doc: Document,
    strategy: SegmentationStrategy,
    session: Session | None = None,
    settings: AgentSettings = AgentSettings(),
    target_language: str = "de",
    prompts: PromptLibrary | None = None,
    embedder: Embedder | None = None,
) -> list[Discourse]:
    if strategy.kind == "llm":
        if session is None:
            raise ValueError("LLM segmentation needs a gateway session")
        return segment_llm(doc, session, settings, target_language, prompts, strategy.max_sentences)
    if strategy.kind == "random":
        return segment_random(doc, strategy.seed)
    return segment_semantic(doc, embedder, strategy.threshold, strategy.window)
