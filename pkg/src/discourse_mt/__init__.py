"""Document translation over a directed acyclic graph of discourse units.

A document is split into contiguous discourses wired into a dependency
graph. Each discourse is then translated with structured memory carried
along the graph edges.
"""
from .config import ConfigError, RunConfig, load_config
from .core import (
    Discourse,
    DiscourseGraph,
    Document,
    LocalMemory,
    Sentence,
    Translation,
    assemble,
)
from .graph import EdgeStrategy, build_graph, enumerate_paths
from .ingestion import load_corpus, preprocess, split_sentences
from .memory import MemoryFlags, aggregate, extract
from .metrics import azpt, consistency_ratio, ctt, d_bleu
from .segmentation import SegmentationStrategy, segment
from .translation import RunRecord, run_corpus, run_pipeline, write_run_dir

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Discourse",
    "DiscourseGraph",
    "Document",
    "EdgeStrategy",
    "LocalMemory",
    "MemoryFlags",
    "RunConfig",
    "RunRecord",
    "SegmentationStrategy",
    "Sentence",
    "Translation",
    "aggregate",
    "assemble",
    "azpt",
    "build_graph",
    "consistency_ratio",
    "ctt",
    "d_bleu",
    "enumerate_paths",
    "extract",
    "load_config",
    "load_corpus",
    "preprocess",
    "run_corpus",
    "run_pipeline",
    "segment",
    "split_sentences",
    "write_run_dir",
]
