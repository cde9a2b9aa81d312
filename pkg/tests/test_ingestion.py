import json

import pytest
from hypothesis import given, strategies as st

from discourse_mt.ingestion import (
    CorpusError,
    dump_jsonl,
    dump_lines,
    load_corpus,
    normalize,
    preprocess,
    split_sentences,
)


def test_split_western():
    text = "Dr. Smith arrived at 5 p.m. yesterday. He was late! Was he? J. R. Doe agreed."
    assert split_sentences(text) == [
        "Dr. Smith arrived at 5 p.m. yesterday.",
        "He was late!",
        "Was he?",
        "J. R. Doe agreed.",
    ]


def test_split_keeps_decimals_and_quotes():
    assert split_sentences("Pi is 3.14 roughly. \"Really?\" she asked.") == [
        "Pi is 3.14 roughly.", "\"Really?\"", "she asked."
    ]


def test_split_cjk_without_spaces():
    assert split_sentences("我爱猫。你呢？好的！", "zh") == ["我爱猫。", "你呢？", "好的！"]
    assert split_sentences("猫が好き。「本当？」", "ja") == ["猫が好き。", "「本当？」"]


def test_normalize_and_preprocess():
    assert normalize("  a  b\n c ") == "a b c"
    assert normalize("é") == "é"
    doc = preprocess("One. Two.", doc_id="x")
    assert doc.texts == ["One.", "Two."]
    with pytest.raises(CorpusError):
        preprocess("   ")


@given(st.text(alphabet=st.sampled_from(list("abc .!?\n")), max_size=80))
def test_split_never_loses_words(text):
    parts = split_sentences(text)
    assert " ".join(parts).split() == normalize(text).split()
    assert all(p == p.strip() and p for p in parts)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_lines_format_with_references(tmp_path):
    src = write(tmp_path / "src.txt", "A1.\nA2.\n\n\nB1.\n")
    ref = write(tmp_path / "ref.txt", "a1.\na2.\n\nb1.\n")
    items = load_corpus(src, "lines", [ref], target_lang="de")
    assert [i.document.doc_id for i in items] == ["doc0", "doc1"]
    assert items[0].document.texts == ["A1.", "A2."]
    assert items[0].references == ("a1. a2.",)
    bad = write(tmp_path / "bad.txt", "x\n")
    with pytest.raises(CorpusError):
        load_corpus(src, "lines", [bad])


def test_doc_ids_are_zero_padded(tmp_path):
    src = write(tmp_path / "s.txt", "\n\n".join(f"S{i}." for i in range(12)))
    ids = [i.document.doc_id for i in load_corpus(src)]
    assert ids[0] == "doc00" and ids[-1] == "doc11"


def test_jsonl_format(tmp_path):
    recs = [
        {"doc_id": "talk1", "sentences": ["Hi.", " "], "references": [["Hallo."], "Servus."]},
        {"doc_id": "talk2", "language": "en", "sentences": ["Bye."]},
    ]
    src = write(tmp_path / "c.jsonl", "\n".join(json.dumps(r) for r in recs) + "\n")
    items = load_corpus(src, "jsonl")
    assert items[0].document.texts == ["Hi."]
    assert items[0].references == ("Hallo.", "Servus.")
    assert items[1].references == ()
    dup = write(tmp_path / "d.jsonl", json.dumps(recs[1]) + "\n" + json.dumps(recs[1]) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(dup, "jsonl")
    empty = write(tmp_path / "e.jsonl", json.dumps({"doc_id": "x", "sentences": []}) + "\n")
    with pytest.raises(CorpusError):
        load_corpus(empty, "jsonl")
    with pytest.raises(CorpusError):
        load_corpus(write(tmp_path / "f.jsonl", "{oops\n"), "jsonl")


def test_round_trips(tmp_path):
    src = write(tmp_path / "src.txt", "A1.\nA2.\n\nB1.\n")
    items = load_corpus(src)
    dump_lines(items, tmp_path / "out.txt")
    assert [i.document for i in load_corpus(tmp_path / "out.txt")] == [i.document for i in items]
    dump_jsonl(items, tmp_path / "out.jsonl")
    assert [i.document for i in load_corpus(tmp_path / "out.jsonl", "jsonl")] == [i.document for i in items]


def test_corpus_errors(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "missing.txt")
    with pytest.raises(CorpusError):
        load_corpus(write(tmp_path / "blank.txt", "\n\n"))
    with pytest.raises(CorpusError):
        load_corpus(write(tmp_path / "x.txt", "a"), "xml")
