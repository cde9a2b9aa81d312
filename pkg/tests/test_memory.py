import pytest
from hypothesis import given, settings, strategies as st

from conftest import mock_gateway
from discourse_mt.core import MEMORY_COMPONENTS, LocalMemory
from discourse_mt.memory import MemoryExtractionError, MemoryFlags, aggregate, extract

PAIR = ("en", "de")


def scripted(**responses):
    return [{"match": {"agent": f"memory.{c}"}, "response": r} for c, r in responses.items()]


FULL = scripted(
    noun_pronoun='{"the engineer": "sie"}',
    entities='{"Kiel": "Kiel"}',
    phrases='{"new wing": "neuer Flügel"}',
    connectives='{"however": "jedoch"}',
    summary="Ein Museum eröffnet einen Flügel.",
)


def test_extract_one_call_per_component():
    gw, _ = mock_gateway(FULL)
    s = gw.session()
    mem = extract("src", "tgt", PAIR, s)
    assert [c.agent_kind for c in s.calls] == [f"memory.{c}" for c in MEMORY_COMPONENTS]
    assert mem.entities == {"Kiel": "Kiel"}
    assert mem.connectives == {"however": "jedoch"}
    assert mem.summary == "Ein Museum eröffnet einen Flügel."


def test_disabled_components_cost_nothing():
    gw, _ = mock_gateway(FULL)
    s = gw.session()
    mem = extract("src", "tgt", PAIR, s, flags=MemoryFlags(phrases=False, summary=False))
    assert len(s.calls) == 3
    assert mem.phrases == {} and mem.summary == ""
    s2 = gw.session()
    assert extract("src", "tgt", PAIR, s2, flags=MemoryFlags.none()).is_empty()
    assert s2.calls == []


def test_extract_reasks_then_fails_with_component_name():
    entries = FULL + [{"match": {"agent": "memory.entities", "ordinal": 0}, "response": "not json"}]
    gw, _ = mock_gateway(entries)
    s = gw.session()
    assert extract("src", "tgt", PAIR, s).entities == {"Kiel": "Kiel"}
    assert len(s.calls) == 6
    bad = scripted(noun_pronoun="{}", entities="[1]", phrases="{}", connectives="{}", summary="x")
    gw, _ = mock_gateway(bad)
    with pytest.raises(MemoryExtractionError) as info:
        extract("src", "tgt", PAIR, gw.session())
    assert info.value.component == "entities"


def test_extract_needs_text():
    gw, _ = mock_gateway(FULL)
    with pytest.raises(ValueError):
        extract("", "tgt", PAIR, gw.session())


def test_flags_from_dict():
    assert MemoryFlags.from_dict({"phrases": False}).enabled() == ["noun_pronoun", "entities", "connectives", "summary"]
    with pytest.raises(ValueError):
        MemoryFlags.from_dict({"glossary": True})


def test_earliest_predecessor_wins_conflicts():
    m0 = LocalMemory(entities={"Kiel": "Kiel", "museum": "Museum"}, summary="erste")
    m1 = LocalMemory(entities={"museum": "Hafenmuseum", "wing": "Flügel"}, phrases={"p": "q"}, summary="zweite")
    m2 = LocalMemory(entities={"Kiel": "Kil", "roof": "Dach"}, summary="dritte")
    merged = aggregate([m0, m1, m2], pred_indices=[0, 2, 5])
    assert dict(merged.entities) == {"Kiel": "Kiel", "museum": "Museum", "wing": "Flügel", "roof": "Dach"}
    assert list(merged.entities) == ["Kiel", "museum", "wing", "roof"]
    assert dict(merged.phrases) == {"p": "q"}
    assert merged.summary == "erste | zweite | dritte"


def test_aggregate_edge_cases():
    assert aggregate([]).is_empty()
    m = LocalMemory(summary="x")
    assert aggregate([m]) is m
    with pytest.raises(ValueError):
        aggregate([m, m], pred_indices=[3, 1])
    many = [LocalMemory(summary=str(i)) for i in range(8)]
    assert aggregate(many, summary_cap=3).summary == "0 | 1 | 2"
    assert aggregate(many, summary_cap=None).summary.count("|") == 7


keys = st.sampled_from(["Kiel", "museum", "wing", "roof", "she", "however", "bank"])
maps = st.dictionaries(keys, st.text(min_size=1, max_size=5), max_size=4)
memories = st.builds(
    LocalMemory,
    noun_pronoun=maps,
    entities=maps,
    phrases=maps,
    connectives=maps,
    summary=st.text(alphabet="abc xyz", max_size=10).map(lambda s: " ".join(s.split())),
)


@settings(max_examples=100, deadline=None)
@given(memories)
def test_aggregate_is_idempotent(mem):
    once = aggregate([mem])
    assert aggregate([once]) == once == mem
    doubled = aggregate([mem, mem])
    for c in ("noun_pronoun", "entities", "phrases", "connectives"):
        assert dict(getattr(doubled, c)) == dict(getattr(mem, c))


@settings(max_examples=100, deadline=None)
@given(st.lists(memories, min_size=1, max_size=5))
def test_aggregate_keeps_first_binding(mems):
    merged = aggregate(mems)
    for c in ("noun_pronoun", "entities", "phrases", "connectives"):
        for key, value in getattr(merged, c).items():
            first = next(getattr(m, c)[key] for m in mems if key in getattr(m, c))
            assert value == first
