import pytest
from hypothesis import given, strategies as st

from discourse_mt.core import LocalMemory
from discourse_mt.llm.agents import AgentSettings, ask_binary
from discourse_mt.llm.gateway import Gateway, MockBackend
from discourse_mt.llm.parsing import ParseError, parse_binary, parse_json_map, parse_summary
from discourse_mt.llm.prompts import (
    EDGE,
    MEMORY_HEADER,
    MEMORY_TEMPLATES,
    SEGMENTATION,
    TRANSLATION,
    PromptTemplate,
    RenderError,
    language_slots,
    render,
    render_memory,
)


@pytest.mark.parametrize("text,value", [
    ("yes", True), ("Yes.", True), ("  YES", True), ("true", True), ('"yes"', True),
    ("no", False), ("No, it does not.", False), ("false", False), ("**No**", False),
])
def test_parse_binary_accepts(text, value):
    assert parse_binary(text) is value


@pytest.mark.parametrize("text", ["", "maybe", "Y", "The answer is yes", "1"])
def test_parse_binary_rejects(text):
    with pytest.raises(ParseError):
        parse_binary(text)


def test_parse_json_map():
    assert parse_json_map('{"Kiel": "Kiel", " ": "x"}') == {"Kiel": "Kiel"}
    assert parse_json_map('```json\n{"a": "b"}\n```') == {"a": "b"}
    assert parse_json_map("{}") == {}
    for bad in ["[]", "{'a': 'b'}", '{"a": 1}', '{"a": {"b": "c"}}', "prose"]:
        with pytest.raises(ParseError):
            parse_json_map(bad, "entities")


def test_parse_summary_flattens_to_one_line():
    assert parse_summary("  Eine\nZeile.  ") == "Eine Zeile."
    with pytest.raises(ParseError):
        parse_summary("   \n ")


def test_templates_declare_their_slots():
    assert set(SEGMENTATION.slot_names) == {"source_lang", "target_lang", "current", "sentence"}
    assert set(EDGE.slot_names) == {"source_lang", "target_lang", "earlier", "later"}
    assert set(TRANSLATION.slot_names) == {"source_lang", "target_lang", "memory_section", "source"}
    for template in MEMORY_TEMPLATES.values():
        assert set(template.slot_names) == {"source_lang", "target_lang", "source", "translation"}
        assert len(template.examples) >= 1


def test_render_is_deterministic_and_complete():
    slots = {**language_slots("en", "de"), "current": "A.", "sentence": "B."}
    a = render(SEGMENTATION, slots)
    assert a == render(SEGMENTATION, dict(reversed(list(slots.items()))))
    assert "English" in a and "German" in a
    assert a.rstrip().endswith("Answer:")
    assert a.count("### Example") == len(SEGMENTATION.examples)
    assert "$" not in a.split("### Task")[1]
    with pytest.raises(RenderError):
        render(SEGMENTATION, {"current": "A."})


def test_render_refuses_placeholders_missing_from_examples():
    t = PromptTemplate("t", "Do $x.", "Q: $y", ())
    assert render(t, {"x": "1", "y": "2"}).endswith("### Task\nQ: 2")


def test_render_memory():
    assert render_memory(LocalMemory()) == ""
    block = render_memory(LocalMemory(entities={"Kiel": "Kiel"}, summary="Kurz."))
    assert block.startswith(MEMORY_HEADER)
    assert "- Kiel => Kiel" in block and "Kurz." in block


@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_binary_parser_never_guesses(text):
    try:
        value = parse_binary(text)
    except ParseError:
        return
    first = text.strip(" \t\r\n\"'`*.,:;!?()[]<>-").split()[0].lower()
    assert first.startswith("yes" if value else "no") or first.startswith("true" if value else "false")


def test_ask_binary_reasks_once_with_a_new_prompt():
    mock = MockBackend([
        {"match": {"agent": "edge", "ordinal": 0}, "response": "perhaps"},
        {"match": {"agent": "edge", "ordinal": 1}, "response": "yes"},
    ])
    s = Gateway(mock).session()
    assert ask_binary(s, "edge", "Related?", AgentSettings()) is True
    assert len(s.calls) == 2
    assert s.calls[0].prompt_sha256 != s.calls[1].prompt_sha256


def test_ask_binary_fails_after_second_bad_answer():
    s = Gateway(MockBackend([{"match": {"agent": "edge"}, "response": "hmm"}])).session()
    with pytest.raises(ParseError):
        ask_binary(s, "edge", "Related?", AgentSettings())
