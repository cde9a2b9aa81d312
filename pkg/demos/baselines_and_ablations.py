"""
Baselines and ablations
=======================

The same document under different segmentation and graph strategies, and
with agents switched off, comparing how many model calls each variant
makes.
"""

from collections import Counter
from dataclasses import replace
from pathlib import Path

from discourse_mt.config import RunConfig
from discourse_mt.graph import EdgeStrategy
from discourse_mt.ingestion import load_corpus
from discourse_mt.llm.gateway import Gateway, MockBackend
from discourse_mt.memory import MemoryFlags
from discourse_mt.segmentation import SegmentationStrategy
from discourse_mt.translation import run_pipeline

ROOT = Path(__file__).resolve().parents[1]
doc = load_corpus(ROOT / "tests" / "fixtures" / "corpus.txt")[0].document
script = ROOT / "configs" / "generic_mock.json"


def calls(config):
    record = run_pipeline(doc, config, Gateway(MockBackend.from_file(script)))
    groups = Counter(c.agent_kind.split(".")[0] for c in record.calls)
    return len(record.segmentation), dict(groups)


base = RunConfig()

# Random segmentation draws its boundary count from 0..n//3.
print(calls(replace(base, segmentation=SegmentationStrategy("random", seed=4), edges=EdgeStrategy("chain"))))

# Semantic segmentation breaks where neighbouring sentences stop overlapping.
print(calls(replace(base, segmentation=SegmentationStrategy("semantic", threshold=0.1))))

# TF-IDF edges replace the edge agent.
print(calls(replace(base, edges=EdgeStrategy("tfidf", tau=0.2))))

# Translation agent only: one call for the whole document.
print(calls(replace(base, ablation="ta_only")))

# Segmentation and translation, no memory.
print(calls(replace(base, ablation="ta_da")))

# Dropping one memory component saves one call per discourse.
print(calls(replace(base, ablation="custom", memory=MemoryFlags(phrases=False))))
