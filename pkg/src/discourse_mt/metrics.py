"""Document-level evaluation metrics plus consistency ratios along paths
of the discourse graph."""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .core import DiscourseGraph, LocalMemory, joiner_for
from .graph import enumerate_paths

NGRAM_ORDER = 4
# Zero n-gram matches are floored to this many counts.
SMOOTH_EPSILON = 0.1

_CJK = re.compile(r"[\u3040-\u30ff\u3400-\u4dbf\u4e00-\u9fff\uf900-\ufaff]")


class UndefinedMetricError(ValueError):
    """The metric has no scorable items; it is undefined, not zero."""


def bleu_tokens(text: str, lang: str) -> list[str]:
    if joiner_for(lang) == "":
        return [ch for ch in text if not ch.isspace()]
    return text.split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, ...]
    matches: tuple[int, ...]
    totals: tuple[int, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int


def _bleu_stats(hypothesis: str, references: Sequence[str], lang: str):
    if not hypothesis or not hypothesis.strip():
        raise ValueError("empty hypothesis")
    if not references or any(not r or not r.strip() for r in references):
        raise ValueError("need at least one non-empty reference")
    hyp = bleu_tokens(hypothesis, lang)
    refs = [bleu_tokens(r, lang) for r in references]
    matches, totals = [], []
    for n in range(1, NGRAM_ORDER + 1):
        counts = _ngrams(hyp, n)
        max_ref: Counter = Counter()
        for ref in refs:
            max_ref |= _ngrams(ref, n)
        matches.append(sum(min(c, max_ref[g]) for g, c in counts.items()))
        totals.append(sum(counts.values()))
    c = len(hyp)
    r = min((len(ref) for ref in refs), key=lambda rl: (abs(rl - c), rl))
    return matches, totals, c, r


def _bleu_from_stats(matches, totals, c, r) -> BleuScore:
    precisions = [
        (m / t if m else SMOOTH_EPSILON / t) for m, t in zip(matches, totals) if t
    ]
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / len(precisions))
    return BleuScore(score, tuple(precisions), tuple(matches), tuple(totals), bp, c, r)


def d_bleu_details(hypothesis: str, references: Sequence[str], lang: str = "en") -> BleuScore:
    """BLEU with whole documents as segments. Clipped n-gram counts run
    over orders 1..4. The brevity penalty uses the closest reference
    length, the shorter one on ties. An order with
    zero matches scores SMOOTH_EPSILON / total; an order with no hypothesis
    n-grams at all (document shorter than n) is left out of the mean."""
    return _bleu_from_stats(*_bleu_stats(hypothesis, references, lang))


def corpus_d_bleu(
    hypotheses: Sequence[str], references: Sequence[Sequence[str]], lang: str = "en"
) -> BleuScore:
    """d-BLEU over a set of documents: each document is one segment and
    n-gram statistics are pooled before the geometric mean."""
    if not hypotheses or len(hypotheses) != len(references):
        raise ValueError("need one reference set per hypothesis document")
    matches = [0] * NGRAM_ORDER
    totals = [0] * NGRAM_ORDER
    c = r = 0
    for hyp, refs in zip(hypotheses, references):
        m, t, hc, rc = _bleu_stats(hyp, refs, lang)
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        c += hc
        r += rc
    return _bleu_from_stats(matches, totals, c, r)


def d_bleu(hypothesis: str, references: Sequence[str], lang: str = "en") -> float:
    return d_bleu_details(hypothesis, references, lang).score


# ---------------------------------------------------------------- cTT


@dataclass(frozen=True)
class Term:
    term: str
    variants: tuple[str, ...] = ()


@dataclass(frozen=True)
class TermLexicon:
    terms: tuple[Term, ...]

    def __post_init__(self):
        names = [t.term for t in self.terms]
        if any(not n for n in names):
            raise ValueError("lexicon terms must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("lexicon terms must be unique")

    @classmethod
    def from_json(cls, data: Any) -> "TermLexicon":
        entries = data["terms"] if isinstance(data, Mapping) else data
        terms = []
        for e in entries:
            if isinstance(e, str):
                terms.append(Term(e))
            else:
                terms.append(Term(e["term"], tuple(e.get("variants", ()))))
        return cls(tuple(terms))

    @classmethod
    def load(cls, path: str | Path) -> "TermLexicon":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def term_consistency(translations: Sequence[str]) -> float:
    """Fraction of unordered occurrence pairs translated identically."""
    k = len(translations)
    if k < 2:
        raise UndefinedMetricError("a term needs at least two occurrences")
    same = sum(n * (n - 1) // 2 for n in Counter(translations).values())
    return same / math.comb(k, 2)


def ctt_from_occurrences(occurrences: Mapping[str, Sequence[str]]) -> float:
    """Mean per-term consistency over terms with two or more occurrences."""
    scores = [term_consistency(ts) for ts in occurrences.values() if len(ts) >= 2]
    if not scores:
        raise UndefinedMetricError("no term occurs twice; cTT is undefined")
    return sum(scores) / len(scores)


def _term_pattern(term: str) -> re.Pattern:
    body = re.escape(term)
    if _CJK.search(term):
        return re.compile(body, re.IGNORECASE)
    return re.compile(r"(?<!\w)" + body + r"(?!\w)", re.IGNORECASE)


def find_occurrences(term: str, text: str) -> list[int]:
    return [m.start() for m in _term_pattern(term).finditer(text)]


def _lookup_memory(term: str, mem: LocalMemory | None) -> str | None:
    if mem is None:
        return None
    for component in (mem.entities, mem.phrases):
        for key, value in component.items():
            if key.casefold() == term.casefold() and value:
                return value
    return None


def recover_term_translations(
    sources: Sequence[str],
    targets: Sequence[str],
    lexicon: TermLexicon,
    memories: Sequence[LocalMemory | None] | None = None,
) -> dict[str, list[str]]:
    """Target-side rendering of each source occurrence of each term.

    Per discourse, a term's rendering comes from that discourse's own
    entity/phrase memory when the memorised value appears in the
    translation; otherwise the gold variants found in the translation are
    assigned to the source occurrences in order of appearance. Occurrences
    that cannot be resolved are left out.
    """
    if len(sources) != len(targets):
        raise ValueError("sources and targets differ in length")
    out: dict[str, list[str]] = {}
    for term in lexicon.terms:
        found: list[str] = []
        for i, (src, tgt) in enumerate(zip(sources, targets)):
            count = len(find_occurrences(term.term, src))
            if not count:
                continue
            mem = memories[i] if memories is not None and i < len(memories) else None
            value = _lookup_memory(term.term, mem)
            if value is not None and find_occurrences(value, tgt):
                found.extend([value] * count)
                continue
            hits = sorted(
                (pos, v) for v in term.variants for pos in find_occurrences(v, tgt)
            )
            found.extend(v for _, v in hits[:count])
        out[term.term] = found
    return out


def ctt(
    sources: Sequence[str],
    targets: Sequence[str],
    lexicon: TermLexicon,
    memories: Sequence[LocalMemory | None] | None = None,
) -> float:
    return ctt_from_occurrences(recover_term_translations(sources, targets, lexicon, memories))


# ---------------------------------------------------------------- aZPT


@dataclass(frozen=True)
class ZeroPronoun:
    gold: tuple[str, ...]
    discourse: int | None = None
    sentence: int | None = None
    doc_id: str | None = None

    def __post_init__(self):
        if (self.discourse is None) == (self.sentence is None):
            raise ValueError("a zero pronoun needs exactly one of discourse / sentence")
        if not self.gold:
            raise ValueError("a zero pronoun needs at least one gold resolution")


@dataclass(frozen=True)
class ZPAnnotation:
    records: tuple[ZeroPronoun, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    @classmethod
    def from_json(cls, data: Any) -> "ZPAnnotation":
        entries = data["zero_pronouns"] if isinstance(data, Mapping) else data
        recs = []
        for e in entries:
            gold = e["gold"]
            recs.append(ZeroPronoun(
                (gold,) if isinstance(gold, str) else tuple(gold),
                discourse=e.get("discourse"),
                sentence=e.get("sentence"),
                doc_id=e.get("doc_id"),
            ))
        return cls(tuple(recs))

    @classmethod
    def load(cls, path: str | Path) -> "ZPAnnotation":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def for_document(self, doc_id: str) -> "ZPAnnotation":
        return ZPAnnotation(tuple(r for r in self.records if r.doc_id in (None, doc_id)))


Judge = Callable[[str, Sequence[str]], bool]


def exact_match_judge(span: str, gold: Sequence[str]) -> bool:
    return span.strip() in {g.strip() for g in gold}


def contains_judge(span: str, gold: Sequence[str]) -> bool:
    return any(find_occurrences(g, span) for g in gold)


def azpt_counts(
    translations: Sequence[str],
    zp: ZPAnnotation,
    judge: Judge = contains_judge,
    spans: Sequence[tuple[int, int]] | None = None,
) -> tuple[int, int]:
    """(accepted, annotated) zero-pronoun counts. Each record points at a
    discourse, or at a sentence resolved to its discourse via ``spans``."""
    accepted = 0
    for rec in zp.records:
        k = rec.discourse
        if k is None:
            if spans is None:
                raise ValueError("sentence locators need discourse spans")
            k = next((i for i, (lo, hi) in enumerate(spans) if lo <= rec.sentence <= hi), None)
            if k is None:
                raise IndexError(f"sentence {rec.sentence} outside the segmentation")
        accepted += bool(judge(translations[k], rec.gold))
    return accepted, len(zp)


def azpt(
    translations: Sequence[str],
    zp: ZPAnnotation,
    judge: Judge = contains_judge,
    spans: Sequence[tuple[int, int]] | None = None,
) -> float:
    """Share of annotated zero pronouns the judge accepts."""
    if len(zp) == 0:
        raise UndefinedMetricError("no zero pronouns annotated; aZPT is undefined")
    accepted, total = azpt_counts(translations, zp, judge, spans)
    return accepted / total


# ---------------------------------------------------------------- paths


def consistency_ratio(node_consistency: Sequence[bool]) -> float:
    """Leading run of consistent nodes over path length. The first node
    anchors the path and counts as consistent."""
    k = len(node_consistency)
    if k < 2:
        raise ValueError("consistency ratio needs a path of at least two nodes")
    if not node_consistency[0]:
        raise ValueError("the first node of a path is consistent by convention")
    leading = 0
    for ok in node_consistency:
        if not ok:
            break
        leading += 1
    return leading / k


def node_consistent(source: str, target: str, incident: LocalMemory) -> bool:
    """Every entity the incident memory knows that reappears in the source
    must reappear with its memorised translation in the target."""
    for src, tgt in incident.entities.items():
        if find_occurrences(src, source) and not (tgt and find_occurrences(tgt, target)):
            return False
    return True


@dataclass
class PathStats:
    length_histogram: dict[int, int] = field(default_factory=dict)
    cr_histogram: dict[str, int] = field(default_factory=dict)
    paths: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "paths": self.paths,
            "length_histogram": {str(k): v for k, v in sorted(self.length_histogram.items())},
            "cr_histogram": dict(sorted(self.cr_histogram.items())),
        }


def cr_bin(value: float) -> str:
    return f"{value:.2f}"


def path_stats(
    g: DiscourseGraph,
    max_len: int | None = None,
    node_consistency: Sequence[bool] | None = None,
) -> PathStats:
    """Histogram of path node counts and, given per-node consistency, of CR."""
    paths = enumerate_paths(g, max_len)
    stats = PathStats(paths=len(paths))
    lengths = Counter(len(p) for p in paths)
    stats.length_histogram = dict(sorted(lengths.items()))
    if node_consistency is not None:
        crs = Counter(
            cr_bin(consistency_ratio([True] + [node_consistency[v] for v in p[1:]])) for p in paths
        )
        stats.cr_histogram = dict(sorted(crs.items()))
    return stats


def share_of_paths_within(stats: PathStats, lo: int = 2, hi: int = 5) -> float:
    if not stats.paths:
        raise UndefinedMetricError("graph has no paths")
    return sum(v for k, v in stats.length_histogram.items() if lo <= k <= hi) / stats.paths


def merge_histograms(hists: Iterable[Mapping[Any, int]]) -> dict[Any, int]:
    total: Counter = Counter()
    for h in hists:
        total.update(h)
    return dict(sorted(total.items()))

