"""Reading document-aligned corpora and splitting raw text into sentences.

Formats
-------
lines
    One sentence per line, documents separated by a blank line. Source and
    reference files are paired by document order.
jsonl
    One document per line: ``{"doc_id", "language"?, "sentences": [...],
    "references": [[...], ...]?}``. Each reference is a list of sentences
    (or a single string).
"""
from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .core import Document, base_language, joiner_for

DEFAULT_ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.",
    "cf.", "no.", "fig.", "inc.", "ltd.", "co.", "corp.", "jan.", "feb.", "mar.", "apr.",
    "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.", "a.m.",
    "p.m.", "approx.", "z.b.", "bzw.", "usw.", "d.h.", "mme.", "mlle.",
})

_CLOSERS = "\"'”’»)]}」』）】"
# Western terminal punctuation needs following whitespace; CJK does not.
_WESTERN_END = re.compile(r"[.!?…]+[" + re.escape(_CLOSERS) + r"]*(?=\s)")
_CJK_END = re.compile(r"[。！？!?…]+[" + re.escape(_CLOSERS) + r"]*")


class CorpusError(ValueError):
    pass


def normalize(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).split())


def _last_word(text: str) -> str:
    words = text.split()
    return words[-1].lower() if words else ""


def split_sentences(
    text: str,
    lang: str = "en",
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> list[str]:
    text = normalize(text)
    if not text:
        return []
    abbrevs = {a.lower() for a in abbreviations}
    spaceless = joiner_for(lang) == ""
    pattern = _CJK_END if spaceless else _WESTERN_END
    sentences: list[str] = []
    start = 0
    for m in pattern.finditer(text):
        candidate = text[start : m.end()]
        if not spaceless and m.group(0) == "." and _last_word(candidate) in abbrevs:
            continue
        # single capital initial such as "J. Smith"
        if not spaceless and m.group(0) == "." and re.search(r"(?:^|\s)[A-Z]\.$", candidate):
            continue
        piece = candidate.strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def preprocess(raw_text: str, lang: str = "en", doc_id: str = "doc", **kwargs) -> Document:
    sentences = split_sentences(raw_text, lang, **kwargs)
    if not sentences:
        raise CorpusError(f"document {doc_id!r} is empty")
    return Document.from_texts(doc_id, sentences, lang)


@dataclass(frozen=True)
class CorpusItem:
    document: Document
    references: tuple[str, ...] = field(default_factory=tuple)


def _read_blocks(path: Path) -> list[list[str]]:
    blocks: list[list[str]] = []
    current: list[str] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = normalize(line)
            if line:
                current.append(line)
            elif current:
                blocks.append(current)
                current = []
    if current:
        blocks.append(current)
    return blocks


def load_corpus(
    path: str | Path,
    format: str = "lines",
    references: Sequence[str | Path] = (),
    lang: str = "en",
    target_lang: str = "de",
    id_prefix: str = "doc",
) -> list[CorpusItem]:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"{path} does not exist")
    if format == "lines":
        return _load_lines(path, references, lang, target_lang, id_prefix)
    if format == "jsonl":
        if references:
            raise CorpusError("jsonl corpora carry their references inline")
        return _load_jsonl(path, lang, target_lang)
    raise CorpusError(f"unknown corpus format {format!r}")


def _load_lines(path, references, lang, target_lang, id_prefix) -> list[CorpusItem]:
    blocks = _read_blocks(path)
    if not blocks:
        raise CorpusError(f"{path} contains no documents")
    width = len(str(len(blocks) - 1))
    ref_docs: list[list[str]] = []
    ref_join = joiner_for(target_lang)
    for ref_path in references:
        ref_blocks = _read_blocks(Path(ref_path))
        if len(ref_blocks) != len(blocks):
            raise CorpusError(
                f"{ref_path} has {len(ref_blocks)} documents but {path} has {len(blocks)}"
            )
        ref_docs.append([ref_join.join(b) for b in ref_blocks])
    items = []
    for k, sentences in enumerate(blocks):
        doc = Document.from_texts(f"{id_prefix}{k:0{width}d}", sentences, lang)
        items.append(CorpusItem(doc, tuple(r[k] for r in ref_docs)))
    return items


def _load_jsonl(path, lang, target_lang) -> list[CorpusItem]:
    items = []
    seen = set()
    ref_join = joiner_for(target_lang)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc.msg}") from None
            sentences = [normalize(s) for s in rec.get("sentences", [])]
            sentences = [s for s in sentences if s]
            doc_id = str(rec.get("doc_id", f"doc{lineno - 1}"))
            if not sentences:
                raise CorpusError(f"{path}:{lineno}: document {doc_id!r} is empty")
            if doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            refs = []
            for ref in rec.get("references", []):
                refs.append(normalize(ref) if isinstance(ref, str) else ref_join.join(normalize(s) for s in ref))
            doc = Document.from_texts(doc_id, sentences, rec.get("language", lang))
            items.append(CorpusItem(doc, tuple(refs)))
    if not items:
        raise CorpusError(f"{path} contains no documents")
    return items


def dump_jsonl(items: Sequence[CorpusItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for item in items:
            rec = item.document.to_dict()
            rec["references"] = list(item.references)
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def dump_lines(items: Sequence[CorpusItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n\n".join("\n".join(i.document.texts) for i in items) + "\n")


def is_spaceless(lang: str) -> bool:
    return joiner_for(base_language(lang)) == ""
