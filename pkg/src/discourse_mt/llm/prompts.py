"""Few-shot prompt templates for the four agents.

A template pairs an instruction with a query body and worked examples.
Bodies use ``string.Template`` placeholders (``$name``); rendering refuses
unbound placeholders and is byte-deterministic. The bundled examples are
English->German; other pairs keep them as demonstrations of the task format.
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Mapping

from ..core import MAP_COMPONENTS, LocalMemory

LANGUAGE_NAMES = {
    "en": "English",
    "de": "German",
    "fr": "French",
    "ja": "Japanese",
    "zh": "Chinese",
    "es": "Spanish",
    "it": "Italian",
    "pt": "Portuguese",
    "ru": "Russian",
    "ko": "Korean",
}


def language_name(tag: str) -> str:
    base = tag.replace("_", "-").split("-")[0].lower()
    return LANGUAGE_NAMES.get(base, tag)


class RenderError(KeyError):
    pass


def placeholders(text: str) -> list[str]:
    names = []
    for m in string.Template.pattern.finditer(text):
        name = m.group("named") or m.group("braced")
        if name and name not in names:
            names.append(name)
        elif m.group("invalid") is not None:
            raise RenderError(f"invalid placeholder at offset {m.start()}")
    return names


@dataclass(frozen=True)
class FewShotExample:
    slots: Mapping[str, str]
    answer: str


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    instruction: str
    query: str
    examples: tuple[FewShotExample, ...] = ()
    language_pair: tuple[str, str] = ("en", "de")

    @property
    def slot_names(self) -> list[str]:
        names = placeholders(self.instruction)
        names += [n for n in placeholders(self.query) if n not in names]
        return names


def _substitute(text: str, slots: Mapping[str, str], where: str) -> str:
    try:
        return string.Template(text).substitute(slots)
    except KeyError as exc:
        raise RenderError(f"{where}: unbound slot {exc.args[0]!r}") from None


def render(template: PromptTemplate, slots: Mapping[str, str]) -> str:
    missing = [n for n in template.slot_names if n not in slots]
    if missing:
        raise RenderError(f"{template.template_id}: unbound slots {missing}")
    parts = [_substitute(template.instruction, slots, template.template_id).strip()]
    for k, ex in enumerate(template.examples, 1):
        merged = {**slots, **ex.slots}
        body = _substitute(template.query, merged, f"{template.template_id} example {k}")
        parts.append(f"### Example {k}\n{body} {ex.answer}")
    body = _substitute(template.query, slots, template.template_id)
    parts.append(f"### Task\n{body}")
    return "\n\n".join(parts)


MEMORY_SECTION_TITLES = {
    "noun_pronoun": "Pronouns used for nouns",
    "entities": "Entity translations",
    "phrases": "Phrase translations",
    "connectives": "Connective translations",
}
MEMORY_HEADER = "Context from related passages:"


def render_memory(mem: LocalMemory) -> str:
    """Memory block for the translation prompt, in insertion order.
    Empty memory renders as the empty string."""
    if mem.is_empty():
        return ""
    lines = [MEMORY_HEADER]
    for name in MAP_COMPONENTS:
        entries = getattr(mem, name)
        if entries:
            lines.append(f"{MEMORY_SECTION_TITLES[name]}:")
            lines.extend(f"- {src} => {tgt}" for src, tgt in entries.items())
    if mem.summary:
        lines.append(f"Summary of earlier context: {mem.summary}")
    return "\n".join(lines) + "\n\n"


EN_DE = {"source_lang": "English", "target_lang": "German"}

SEGMENTATION = PromptTemplate(
    "segmentation",
    instruction=(
        "You split a $source_lang document into discourse units for translation into "
        "$target_lang. A discourse unit is a run of consecutive sentences on one topic whose "
        "references can be resolved inside the unit. Given the current "
        "unit and the next sentence, decide whether the sentence continues the current unit. "
        "Answer with one word: yes or no."
    ),
    query=(
        "Current discourse unit:\n$current\n\nNext sentence:\n$sentence\n\n"
        "Does the next sentence belong to the current unit?\nAnswer:"
    ),
    examples=(
        FewShotExample(
            {**EN_DE, "current": "My grandmother grew up on a farm in Bavaria.",
             "sentence": "She milked the cows every morning before school."},
            "yes",
        ),
        FewShotExample(
            {**EN_DE, "current": "My grandmother grew up on a farm in Bavaria. She milked the "
             "cows every morning before school.",
             "sentence": "Today, I want to talk about how batteries store energy."},
            "no",
        ),
        FewShotExample(
            {**EN_DE, "current": "Lithium-ion cells move ions between two electrodes.",
             "sentence": "However, this process slowly wears the electrodes out."},
            "yes",
        ),
    ),
)

EDGE = PromptTemplate(
    "edge",
    instruction=(
        "Passage A comes earlier than passage B in the same $source_lang document. Decide "
        "whether translating B into $target_lang needs context from the translation of A: for "
        "example, B refers back to a person or thing introduced in A, repeats A's terminology or "
        "names, or continues an argument from A. Answer with one word: yes or no."
    ),
    query="Passage A:\n$earlier\n\nPassage B:\n$later\n\nDoes B need context from A?\nAnswer:",
    examples=(
        FewShotExample(
            {**EN_DE, "earlier": "Dr. Weber founded the Clearwater Project in 2009.",
             "later": "Ten years later, the project had cleaned forty rivers."},
            "yes",
        ),
        FewShotExample(
            {**EN_DE, "earlier": "Thank you all for coming tonight.",
             "later": "Coral reefs cover less than one percent of the ocean floor."},
            "no",
        ),
        FewShotExample(
            {**EN_DE, "earlier": "We call this effect the bank run.",
             "later": "A bank run can ruin even a healthy bank within days."},
            "yes",
        ),
    ),
)

_MEMORY_QUERY = (
    "$source_lang passage:\n$source\n\n$target_lang translation:\n$translation\n\n"
    "Answer:"
)

_EX_SOURCE_1 = "Anna met the new mayor at the station. She asked him about the bridge."
_EX_TARGET_1 = "Anna traf den neuen Bürgermeister am Bahnhof. Sie fragte ihn nach der Brücke."
_EX_SOURCE_2 = "The Federal Reserve raised interest rates again. Nevertheless, inflation stayed high."
_EX_TARGET_2 = "Die Federal Reserve erhöhte erneut die Zinsen. Dennoch blieb die Inflation hoch."
_EX_SOURCE_3 = "Thank you. So let me start with a question."
_EX_TARGET_3 = "Danke. Also lassen Sie mich mit einer Frage beginnen."


def _memory_examples(answers: tuple[str, str, str]) -> tuple[FewShotExample, ...]:
    pairs = ((_EX_SOURCE_1, _EX_TARGET_1), (_EX_SOURCE_2, _EX_TARGET_2), (_EX_SOURCE_3, _EX_TARGET_3))
    return tuple(
        FewShotExample({**EN_DE, "source": s, "translation": t}, a)
        for (s, t), a in zip(pairs, answers)
    )


MEMORY_NOUN_PRONOUN = PromptTemplate(
    "memory.noun_pronoun",
    instruction=(
        "Read a $source_lang passage and its $target_lang translation. For every noun that a "
        "pronoun in the translation refers to, give the $target_lang pronoun used for it. Return "
        "a flat JSON object mapping the $source_lang noun to the $target_lang pronoun, or {} if "
        "there is none."
    ),
    query=_MEMORY_QUERY,
    examples=_memory_examples((
        '{"Anna": "sie", "the new mayor": "ihn"}',
        '{}',
        '{}',
    )),
)

MEMORY_ENTITIES = PromptTemplate(
    "memory.entities",
    instruction=(
        "Read a $source_lang passage and its $target_lang translation. List the named entities "
        "(people, places, organisations, products) and how each was rendered in $target_lang. "
        "Return a flat JSON object mapping the $source_lang entity to its $target_lang form, or "
        "{} if there is none."
    ),
    query=_MEMORY_QUERY,
    examples=_memory_examples((
        '{"Anna": "Anna"}',
        '{"The Federal Reserve": "Die Federal Reserve"}',
        '{}',
    )),
)

MEMORY_PHRASES = PromptTemplate(
    "memory.phrases",
    instruction=(
        "Read a $source_lang passage and its $target_lang translation. List the key phrases and "
        "terms whose translation should stay the same later in the document. Return a flat JSON "
        "object mapping each $source_lang phrase to its $target_lang phrase, or {} if there is "
        "none."
    ),
    query=_MEMORY_QUERY,
    examples=_memory_examples((
        '{"the new mayor": "den neuen Bürgermeister", "the bridge": "der Brücke"}',
        '{"interest rates": "die Zinsen", "inflation": "die Inflation"}',
        '{"let me start with a question": "lassen Sie mich mit einer Frage beginnen"}',
    )),
)

MEMORY_CONNECTIVES = PromptTemplate(
    "memory.connectives",
    instruction=(
        "Read a $source_lang passage and its $target_lang translation. List the discourse "
        "connectives (words such as however, so, because, nevertheless) and their $target_lang "
        "translations. Return a flat JSON object mapping the $source_lang connective to the "
        "$target_lang connective, or {} if there is none."
    ),
    query=_MEMORY_QUERY,
    examples=_memory_examples((
        '{}',
        '{"Nevertheless": "Dennoch"}',
        '{"So": "Also"}',
    )),
)

MEMORY_SUMMARY = PromptTemplate(
    "memory.summary",
    instruction=(
        "Read a $source_lang passage and its $target_lang translation. Write a single-line "
        "summary of the passage in $target_lang that a translator of the following passages "
        "would need. Output one line only."
    ),
    query=_MEMORY_QUERY,
    examples=_memory_examples((
        "Anna spricht mit dem neuen Bürgermeister über die Brücke.",
        "Trotz höherer Zinsen bleibt die Inflation hoch.",
        "Der Sprecher beginnt seinen Vortrag mit einer Frage.",
    )),
)

TRANSLATION = PromptTemplate(
    "translation",
    instruction=(
        "Translate the $source_lang passage into $target_lang. If context from related passages "
        "is given, stay consistent with it. Output only "
        "the translation."
    ),
    query="$memory_section$source_lang passage:\n$source\n\n$target_lang translation:",
    examples=(
        FewShotExample(
            {**EN_DE, "memory_section": "",
             "source": "The talk is about water. Clean water is rare."},
            "Der Vortrag handelt von Wasser. Sauberes Wasser ist selten.",
        ),
        FewShotExample(
            {**EN_DE,
             "memory_section": MEMORY_HEADER + "\nEntity translations:\n- Clearwater Project => "
             "Clearwater-Projekt\n\n",
             "source": "The Clearwater Project now works in five countries."},
            "Das Clearwater-Projekt arbeitet inzwischen in fünf Ländern.",
        ),
        FewShotExample(
            {**EN_DE,
             "memory_section": MEMORY_HEADER + "\nPronouns used for nouns:\n- the engineer => "
             "sie\nSummary of earlier context: Eine Ingenieurin entwirft eine neue Brücke.\n\n",
             "source": "She finished the design in March."},
            "Sie stellte den Entwurf im März fertig.",
        ),
    ),
)

MEMORY_TEMPLATES = {
    "noun_pronoun": MEMORY_NOUN_PRONOUN,
    "entities": MEMORY_ENTITIES,
    "phrases": MEMORY_PHRASES,
    "connectives": MEMORY_CONNECTIVES,
    "summary": MEMORY_SUMMARY,
}


@dataclass(frozen=True)
class PromptLibrary:
    segmentation: PromptTemplate = SEGMENTATION
    edge: PromptTemplate = EDGE
    translation: PromptTemplate = TRANSLATION
    memory: Mapping[str, PromptTemplate] = field(default_factory=lambda: dict(MEMORY_TEMPLATES))


def language_slots(source: str, target: str) -> dict[str, str]:
    return {"source_lang": language_name(source), "target_lang": language_name(target)}


BINARY_REASK = "\n\nReply with exactly one word: yes or no."
JSON_REASK = "\n\nReply with a valid flat JSON object only, nothing else."
LINE_REASK = "\n\nReply with a single non-empty line only."
