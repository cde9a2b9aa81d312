"""
Translating a document through its discourse graph
==================================================

A walk through one document with the scripted offline backend: split it
into discourses, wire the dependency graph, then translate node by node
while memory flows along the edges.
"""

from pathlib import Path

from discourse_mt.config import RunConfig
from discourse_mt.ingestion import load_corpus
from discourse_mt.llm.gateway import Gateway, MockBackend
from discourse_mt.translation import run_pipeline

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

# The bundled corpus has three short English documents.
items = load_corpus(FIXTURES / "corpus.txt")
doc = items[0].document
for s in doc.sentences:
    print(s.index, s.text)

# A scripted backend stands in for the model; every answer is fixed.
gateway = Gateway(MockBackend.from_file(FIXTURES / "mock_script.json"))
record = run_pipeline(doc, RunConfig(), gateway)

# Discourses are contiguous sentence spans.
print([d.span for d in record.segmentation])

# Chain edges link neighbours; the edge agent added one long-range edge.
print(record.graph.sorted_edges())
print(record.graph.non_consecutive_edges())

# Node 2 sees the merged memory of its predecessors 0 and 1.
print(dict(record.incident_memory(2).entities))

# The target document is the per-discourse translations in order.
print(record.target_document)

# Every model call is logged with its agent kind and token counts.
print(record.accounting()["calls_by_group"])
