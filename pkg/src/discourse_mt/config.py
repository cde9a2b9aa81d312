"""Run configuration: one declarative JSON or YAML file per experiment.

Every key has an explicit default below; validation errors name the
offending field by its dotted path.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .graph import EdgeStrategy
from .memory import DEFAULT_SUMMARY_CAP, MemoryFlags
from .segmentation import SegmentationStrategy

ABLATIONS = ("full", "ta_only", "ta_da", "ta_da_ma", "custom")
BACKENDS = ("mock", "http")
FORMATS = ("lines", "jsonl")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    url: str | None = None
    api_key_env: str = "OPENAI_API_KEY"
    mock_script: str | None = None
    retries: int = 3
    backoff: float = 0.5
    timeout: float = 120.0


@dataclass(frozen=True)
class InputConfig:
    path: str | None = None
    format: str = "lines"
    references: tuple[str, ...] = ()


@dataclass(frozen=True)
class Pricing:
    prompt_per_1k: float = 0.0
    completion_per_1k: float = 0.0
    currency: str = "USD"

    def cost(self, prompt_tokens: int, completion_tokens: int) -> float:
        return (prompt_tokens * self.prompt_per_1k + completion_tokens * self.completion_per_1k) / 1000.0


@dataclass(frozen=True)
class RunConfig:
    source_lang: str = "en"
    target_lang: str = "de"
    model_name: str = "mock"
    temperature: float = 0.1
    segmentation: SegmentationStrategy = field(default_factory=SegmentationStrategy)
    edges: EdgeStrategy = field(default_factory=EdgeStrategy)
    ablation: str = "full"
    memory: MemoryFlags = field(default_factory=MemoryFlags)
    summary_cap: int = DEFAULT_SUMMARY_CAP
    backend: BackendConfig = field(default_factory=BackendConfig)
    input: InputConfig = field(default_factory=InputConfig)
    pricing: Pricing = field(default_factory=Pricing)
    cache: bool = True
    cache_dir: str | None = None
    workers: int = 1
    agent_workers: int = 1
    seed: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.ablation not in ABLATIONS:
            raise ConfigError("ablation", f"must be one of {list(ABLATIONS)}, got {self.ablation!r}")
        if not 0.0 <= self.temperature <= 1.0:
            raise ConfigError("model.temperature", "must lie in [0, 1]")

    @property
    def lang_pair(self) -> tuple[str, str]:
        return (self.source_lang, self.target_lang)

    def to_dict(self) -> dict[str, Any]:
        seg = asdict(self.segmentation)
        if self.seed is not None:
            seg["seed"] = self.seed
        return {
            "source_lang": self.source_lang,
            "target_lang": self.target_lang,
            "model": {"name": self.model_name, "temperature": self.temperature},
            "segmentation": seg,
            "edges": asdict(self.edges),
            "ablation": self.ablation,
            "memory": {"components": self.memory.to_dict(), "summary_cap": self.summary_cap},
            "backend": asdict(self.backend),
            "input": {**asdict(self.input), "references": list(self.input.references)},
            "pricing": asdict(self.pricing),
            "cache": {"enabled": self.cache, "dir": self.cache_dir},
            "workers": self.workers,
            "agent_workers": self.agent_workers,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str | Path | None = None) -> "RunConfig":
        return _parse(data, Path(base_dir) if base_dir else None)


def _section(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(key, "must be a mapping")
    return value


def _check_keys(section: Mapping[str, Any], allowed: set[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            where = f"{prefix}.{key}" if prefix else key
            raise ConfigError(where, f"unknown field (allowed: {sorted(allowed)})")


def _typed(value: Any, kind: type | tuple, path: str) -> Any:
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, bool) and kind in (int, float):
        raise ConfigError(path, f"expected {kind.__name__}, got bool")
    if not isinstance(value, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(path, f"expected {name}, got {type(value).__name__}")
    return value


def _resolve(path: str | None, base_dir: Path | None) -> str | None:
    if path is None or base_dir is None or Path(path).is_absolute():
        return path
    return str(base_dir / path)


def _build(factory, path: str, **kwargs):
    try:
        return factory(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def _parse(data: Mapping[str, Any], base_dir: Path | None) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "config must be a mapping")
    top = {
        "source_lang", "target_lang", "model", "segmentation", "edges", "ablation", "memory",
        "backend", "input", "pricing", "cache", "workers", "agent_workers", "seed", "out",
    }
    _check_keys(data, top, "")

    model = _section(data, "model")
    _check_keys(model, {"name", "temperature"}, "model")

    seg = _section(data, "segmentation")
    _check_keys(seg, {"kind", "seed", "threshold", "window", "max_sentences"}, "segmentation")
    for key in ("kind",):
        if key in seg:
            _typed(seg[key], str, f"segmentation.{key}")
    if "kind" in seg and seg["kind"] not in ("llm", "random", "semantic"):
        raise ConfigError("segmentation.kind", f"must be one of ['llm', 'random', 'semantic'], got {seg['kind']!r}")
    segmentation = _build(
        SegmentationStrategy,
        "segmentation",
        kind=seg.get("kind", "llm"),
        seed=_typed(seg.get("seed", 0), int, "segmentation.seed"),
        threshold=_typed(seg.get("threshold", 0.2), float, "segmentation.threshold"),
        window=_typed(seg.get("window", 1), int, "segmentation.window"),
        max_sentences=_typed(seg.get("max_sentences", 40), int, "segmentation.max_sentences"),
    )

    edg = _section(data, "edges")
    _check_keys(edg, {"kind", "tau", "window"}, "edges")
    if "kind" in edg and edg["kind"] not in ("llm", "chain", "tfidf"):
        raise ConfigError("edges.kind", f"must be one of ['llm', 'chain', 'tfidf'], got {edg['kind']!r}")
    window = edg.get("window")
    edges = _build(
        EdgeStrategy,
        "edges",
        kind=edg.get("kind", "llm"),
        tau=_typed(edg.get("tau", 0.3), float, "edges.tau"),
        window=None if window is None else _typed(window, int, "edges.window"),
    )

    ablation = data.get("ablation", "full")
    if ablation not in ABLATIONS:
        raise ConfigError("ablation", f"must be one of {list(ABLATIONS)}, got {ablation!r}")

    mem = _section(data, "memory")
    _check_keys(mem, {"components", "summary_cap"}, "memory")
    comps = mem.get("components", {})
    if not isinstance(comps, Mapping):
        raise ConfigError("memory.components", "must be a mapping of component -> bool")
    for key, value in comps.items():
        _typed(value, bool, f"memory.components.{key}")
    try:
        flags = MemoryFlags.from_dict(comps)
    except ValueError as exc:
        raise ConfigError("memory.components", str(exc)) from None
    if ablation == "custom" and not comps:
        raise ConfigError("memory.components", "ablation 'custom' requires explicit component flags")
    summary_cap = _typed(mem.get("summary_cap", DEFAULT_SUMMARY_CAP), int, "memory.summary_cap")
    if summary_cap < 1:
        raise ConfigError("memory.summary_cap", "must be >= 1")

    be = _section(data, "backend")
    _check_keys(be, {f for f in BackendConfig.__dataclass_fields__}, "backend")
    kind = be.get("kind", "mock")
    if kind not in BACKENDS:
        raise ConfigError("backend.kind", f"must be one of {list(BACKENDS)}, got {kind!r}")
    backend = BackendConfig(
        kind=kind,
        url=be.get("url"),
        api_key_env=_typed(be.get("api_key_env", "OPENAI_API_KEY"), str, "backend.api_key_env"),
        mock_script=_resolve(be.get("mock_script"), base_dir),
        retries=_typed(be.get("retries", 3), int, "backend.retries"),
        backoff=_typed(be.get("backoff", 0.5), float, "backend.backoff"),
        timeout=_typed(be.get("timeout", 120.0), float, "backend.timeout"),
    )
    if backend.retries < 0:
        raise ConfigError("backend.retries", "must be >= 0")

    inp = _section(data, "input")
    _check_keys(inp, {"path", "format", "references"}, "input")
    fmt = inp.get("format", "lines")
    if fmt not in FORMATS:
        raise ConfigError("input.format", f"must be one of {list(FORMATS)}, got {fmt!r}")
    refs = inp.get("references", [])
    if isinstance(refs, str):
        refs = [refs]
    input_cfg = InputConfig(
        path=_resolve(inp.get("path"), base_dir),
        format=fmt,
        references=tuple(_resolve(r, base_dir) for r in refs),
    )

    pr = _section(data, "pricing")
    _check_keys(pr, {"prompt_per_1k", "completion_per_1k", "currency"}, "pricing")
    pricing = Pricing(
        prompt_per_1k=_typed(pr.get("prompt_per_1k", 0.0), float, "pricing.prompt_per_1k"),
        completion_per_1k=_typed(pr.get("completion_per_1k", 0.0), float, "pricing.completion_per_1k"),
        currency=pr.get("currency", "USD"),
    )

    cache = _section(data, "cache")
    _check_keys(cache, {"enabled", "dir"}, "cache")

    temperature = _typed(model.get("temperature", 0.1), float, "model.temperature")
    if not 0.0 <= temperature <= 1.0:
        raise ConfigError("model.temperature", f"must lie in [0, 1], got {temperature}")

    cfg = RunConfig(
        source_lang=_typed(data.get("source_lang", "en"), str, "source_lang"),
        target_lang=_typed(data.get("target_lang", "de"), str, "target_lang"),
        model_name=_typed(model.get("name", "mock"), str, "model.name"),
        temperature=temperature,
        segmentation=segmentation,
        edges=edges,
        ablation=ablation,
        memory=flags,
        summary_cap=summary_cap,
        backend=backend,
        input=input_cfg,
        pricing=pricing,
        cache=_typed(cache.get("enabled", True), bool, "cache.enabled"),
        cache_dir=_resolve(cache.get("dir"), base_dir),
        workers=_typed(data.get("workers", 1), int, "workers"),
        agent_workers=_typed(data.get("agent_workers", 1), int, "agent_workers"),
        seed=None if data.get("seed") is None else _typed(data["seed"], int, "seed"),
        out=_resolve(data.get("out"), base_dir),
    )
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    if cfg.agent_workers < 1:
        raise ConfigError("agent_workers", "must be >= 1")
    if cfg.seed is not None:
        cfg = replace(cfg, segmentation=replace(cfg.segmentation, seed=cfg.seed))
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text) if path.suffix in (".yaml", ".yml") else json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(str(path), f"cannot parse config: {exc}") from None
    return RunConfig.from_dict(data or {}, base_dir=path.parent)
