import json
import shutil
from pathlib import Path

import pytest

from discourse_mt.core import Document
from discourse_mt.llm.gateway import Gateway, MockBackend

FIXTURES = Path(__file__).parent / "fixtures"


def make_doc(n: int, doc_id: str = "d", lang: str = "en") -> Document:
    return Document.from_texts(doc_id, [f"Sentence number {i} about topic {i % 3}." for i in range(n)], lang)


def mock_gateway(entries, cache=None) -> tuple[Gateway, MockBackend]:
    backend = MockBackend(entries)
    return Gateway(backend, cache, retries=0, sleep=lambda s: None), backend


def scripted_segmentation(starts, n, doc=None):
    """Mock entries answering the segmentation agent so that discourses open
    at ``starts``."""
    entries = []
    for i in range(1, n):
        match = {"agent": "segmentation", "ordinal": i - 1}
        if doc is not None:
            match["doc"] = doc
        entries.append({"match": match, "response": "no" if i in starts else "yes"})
    return entries


GENERIC = [
    {"match": {"agent": "edge"}, "response": "no"},
    {"match": {"agent": "translation"}, "response": "Übersetzung."},
    {"match": {"agent": "memory.noun_pronoun"}, "response": "{}"},
    {"match": {"agent": "memory.entities"}, "response": "{}"},
    {"match": {"agent": "memory.phrases"}, "response": "{}"},
    {"match": {"agent": "memory.connectives"}, "response": "{}"},
    {"match": {"agent": "memory.summary"}, "response": "Summary."},
]


@pytest.fixture
def fixture_dir(tmp_path) -> Path:
    """A writable copy of the bundled three-document fixture."""
    dest = tmp_path / "fixture"
    shutil.copytree(FIXTURES, dest, ignore=shutil.ignore_patterns("*.py", "__pycache__"))
    return dest


def load_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}")
