"""Chat-completion access for the agents.

Backends (HTTP for OpenAI-compatible servers, or a scripted mock) sit behind
a Gateway that adds caching. Per-document sessions keep the call log."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Protocol, Sequence

import httpx

logger = logging.getLogger(__name__)

SEGMENTATION = "segmentation"
EDGE = "edge"
TRANSLATION = "translation"
MEMORY_PREFIX = "memory."
BINARY_AGENTS = frozenset({SEGMENTATION, EDGE})

BINARY_MAX_TOKENS = 1
GENERATIVE_MAX_TOKENS = 4096
DEFAULT_TEMPERATURE = 0.1


class GatewayError(RuntimeError):
    """Base class for backend failures."""


class TransportError(GatewayError):
    """Network failure or retryable HTTP status, after all retries."""


class MalformedResponseError(GatewayError):
    """The backend answered but the payload is not a chat completion."""


class AuthenticationError(GatewayError):
    """The backend rejected the credentials."""


class RequestRejectedError(GatewayError):
    """Non-retryable client error other than authentication."""


class MockScriptError(GatewayError):
    """A mock backend lookup matched no scripted entry."""


class BatchError(GatewayError):
    """One request of a batch failed; ``index`` locates it in the batch."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"request {index} failed: {cause}")
        self.index = index
        self.cause = cause


def is_valid_agent(kind: str) -> bool:
    return kind in BINARY_AGENTS or kind == TRANSLATION or (
        kind.startswith(MEMORY_PREFIX) and len(kind) > len(MEMORY_PREFIX)
    )


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    agent_kind: str
    rendered_prompt: str
    model_name: str
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int | None = None

    def __post_init__(self):
        if not is_valid_agent(self.agent_kind):
            raise ValueError(f"unknown agent kind {self.agent_kind!r}")
        if not self.rendered_prompt:
            raise ValueError("empty prompt")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 1]")
        limit = BINARY_MAX_TOKENS if self.agent_kind in BINARY_AGENTS else GENERATIVE_MAX_TOKENS
        if self.max_output_tokens is None:
            object.__setattr__(self, "max_output_tokens", limit)
        elif self.max_output_tokens != limit:
            raise ValueError(
                f"{self.agent_kind} requests must use max_output_tokens={limit}, "
                f"got {self.max_output_tokens}"
            )

    def cache_key(self) -> str:
        payload = json.dumps(
            [self.agent_kind, self.model_name, self.temperature, self.rendered_prompt],
            ensure_ascii=False,
        )
        return sha256_text(payload)


@dataclass(frozen=True)
class BackendResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")


class Backend(Protocol):
    def send(self, req: ChatRequest, ordinal: int, scope: str) -> BackendResponse: ...


class HttpBackend:
    """POSTs to ``{url}/chat/completions`` using the common chat schema."""

    RETRYABLE_STATUS = frozenset({408, 409, 425, 429, 500, 502, 503, 504})

    def __init__(
        self,
        url: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 120.0,
        client: httpx.Client | None = None,
    ):
        url = url.rstrip("/")
        self.url = url if url.endswith("/chat/completions") else url + "/chat/completions"
        self.api_key_env = api_key_env
        self.client = client or httpx.Client(timeout=timeout)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "").strip()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def send(self, req: ChatRequest, ordinal: int = 0, scope: str = "") -> BackendResponse:
        body = {
            "model": req.model_name,
            "messages": [{"role": "user", "content": req.rendered_prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
            "stream": False,
        }
        start = time.perf_counter()
        try:
            resp = self.client.post(self.url, json=body, headers=self._headers())
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        latency = time.perf_counter() - start

        if resp.status_code in (401, 403):
            raise AuthenticationError(f"HTTP {resp.status_code} from {self.url}")
        if resp.status_code in self.RETRYABLE_STATUS:
            raise TransportError(f"HTTP {resp.status_code} from {self.url}")
        if resp.status_code >= 400:
            raise RequestRejectedError(f"HTTP {resp.status_code} from {self.url}: {resp.text[:200]}")

        try:
            payload = resp.json()
            text = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected payload from {self.url}: {exc!r}") from exc
        if not isinstance(text, str):
            raise MalformedResponseError("message content is not a string")
        usage = payload.get("usage") or {}
        return BackendResponse(
            text=text,
            prompt_tokens=int(usage.get("prompt_tokens") or 0),
            completion_tokens=int(usage.get("completion_tokens") or 0),
            latency=latency,
        )


class MockBackend:
    """Scripted backend for offline runs.

    The script is a list of ``{"match": ..., "response": str}`` entries.
    ``match`` is either ``{"prompt_sha256": hex}`` or ``{"agent": kind,
    "ordinal": n}``; ``ordinal`` may be omitted to match every call of that
    agent, and an optional ``"doc"`` restricts the entry to one document
    session. A prompt-hash entry beats agent entries, and an exact ordinal
    beats an agent-only entry; document-scoped entries win over unscoped
    ones. A call no entry matches raises MockScriptError.
    """

    def __init__(self, entries: Iterable[dict[str, Any]] = ()):
        self.by_prompt: dict[str, str] = {}
        self.by_ordinal: dict[tuple[str | None, str, int], str] = {}
        self.by_agent: dict[tuple[str | None, str], str] = {}
        self.received: list[tuple[str, str, int]] = []
        self._lock = threading.Lock()
        for entry in entries:
            self.add(entry)

    def add(self, entry: dict[str, Any]) -> None:
        try:
            match, response = entry["match"], entry["response"]
        except (KeyError, TypeError) as exc:
            raise MockScriptError(f"bad mock entry {entry!r}") from exc
        if not isinstance(response, str):
            raise MockScriptError(f"mock response must be a string: {entry!r}")
        if "prompt_sha256" in match:
            self.by_prompt[match["prompt_sha256"]] = response
        elif "agent" in match:
            doc = match.get("doc")
            if match.get("ordinal") is None:
                self.by_agent[(doc, match["agent"])] = response
            else:
                self.by_ordinal[(doc, match["agent"], int(match["ordinal"]))] = response
        else:
            raise MockScriptError(f"mock match needs 'prompt_sha256' or 'agent': {entry!r}")

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "MockBackend":
        with open(path, encoding="utf-8") as f:
            entries = json.load(f)
        if not isinstance(entries, list):
            raise MockScriptError(f"{path}: mock script must be a JSON array")
        return cls(entries)

    def lookup(self, req: ChatRequest, ordinal: int, scope: str) -> str:
        digest = sha256_text(req.rendered_prompt)
        if digest in self.by_prompt:
            return self.by_prompt[digest]
        for doc in (scope, None):
            hit = self.by_ordinal.get((doc, req.agent_kind, ordinal))
            if hit is not None:
                return hit
        for doc in (scope, None):
            hit = self.by_agent.get((doc, req.agent_kind))
            if hit is not None:
                return hit
        raise MockScriptError(
            f"no scripted response for agent={req.agent_kind} ordinal={ordinal} "
            f"doc={scope!r} prompt_sha256={digest}"
        )

    def send(self, req: ChatRequest, ordinal: int = 0, scope: str = "") -> BackendResponse:
        with self._lock:
            self.received.append((scope, req.agent_kind, ordinal))
        text = self.lookup(req, ordinal, scope)
        return BackendResponse(
            text=text,
            prompt_tokens=len(req.rendered_prompt.split()),
            completion_tokens=len(text.split()),
            latency=0.0,
        )


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ResponseCache:
    """Content-addressed response store; with a directory, one JSON record
    per key at ``<dir>/<key[:2]>/<key>.json``."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._mem: dict[str, str] = {}
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        assert self.directory is not None
        return self.directory / key[:2] / f"{key}.json"

    def get(self, req: ChatRequest) -> str | None:
        key = req.cache_key()
        with self._lock:
            if key in self._mem:
                return self._mem[key]
        if self.directory is None:
            return None
        path = self._path(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as f:
            text = json.load(f)["response"]
        with self._lock:
            self._mem[key] = text
        return text

    def put(self, req: ChatRequest, text: str) -> None:
        key = req.cache_key()
        with self._lock:
            self._mem[key] = text
            if self.directory is not None:
                record = {
                    "key": key,
                    "agent_kind": req.agent_kind,
                    "model_name": req.model_name,
                    "temperature": req.temperature,
                    "prompt_sha256": sha256_text(req.rendered_prompt),
                    "response": text,
                }
                _atomic_write_text(self._path(key), json.dumps(record, ensure_ascii=False, indent=2))


@dataclass(frozen=True)
class CallRecord:
    agent_kind: str
    ordinal: int
    prompt_sha256: str
    cached: bool
    prompt_tokens: int
    completion_tokens: int
    latency: float


class Gateway:
    """Shared entry point pairing a backend with an optional cache."""

    def __init__(
        self,
        backend: Backend,
        cache: ResponseCache | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.cache = cache
        self.retries = retries
        self.backoff = backoff
        self.sleep = sleep

    def session(self, scope: str = "") -> "Session":
        return Session(self, scope)

    def _send_with_retries(self, req: ChatRequest, ordinal: int, scope: str) -> BackendResponse:
        attempt = 0
        while True:
            try:
                return self.backend.send(req, ordinal, scope)
            except TransportError as exc:
                if attempt >= self.retries:
                    raise TransportError(f"giving up after {attempt + 1} attempts: {exc}") from exc
                delay = self.backoff * (2 ** attempt)
                logger.warning("transport error (%s); retry %d in %.2fs", exc, attempt + 1, delay)
                self.sleep(delay)
                attempt += 1

    def dispatch(self, req: ChatRequest, ordinal: int, scope: str) -> tuple[BackendResponse, bool]:
        if self.cache is not None:
            hit = self.cache.get(req)
            if hit is not None:
                return BackendResponse(hit), True
        resp = self._send_with_retries(req, ordinal, scope)
        if self.cache is not None:
            self.cache.put(req, resp.text)
        return resp, False

    def complete(self, req: ChatRequest) -> BackendResponse:
        return self.session().complete(req)


@dataclass
class Session:
    """Per-document view of a Gateway: owns agent ordinals and the call log.

    Ordinals are assigned when a request is submitted, so mock lookups and
    the call log do not depend on the order concurrent calls finish in.
    """

    gateway: Gateway
    scope: str = ""
    calls: list[CallRecord] = field(default_factory=list)
    _counters: dict[str, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def _next_ordinal(self, kind: str) -> int:
        with self._lock:
            n = self._counters.get(kind, 0)
            self._counters[kind] = n + 1
            return n

    def _record(self, req: ChatRequest, ordinal: int, resp: BackendResponse, cached: bool) -> CallRecord:
        return CallRecord(
            agent_kind=req.agent_kind,
            ordinal=ordinal,
            prompt_sha256=sha256_text(req.rendered_prompt),
            cached=cached,
            prompt_tokens=0 if cached else resp.prompt_tokens,
            completion_tokens=0 if cached else resp.completion_tokens,
            latency=0.0 if cached else resp.latency,
        )

    def complete(self, req: ChatRequest) -> BackendResponse:
        ordinal = self._next_ordinal(req.agent_kind)
        resp, cached = self.gateway.dispatch(req, ordinal, self.scope)
        with self._lock:
            self.calls.append(self._record(req, ordinal, resp, cached))
        return resp

    def complete_many(self, reqs: Sequence[ChatRequest], workers: int = 1) -> list[BackendResponse]:
        """Issue independent requests, possibly in parallel; results and log
        entries come back in request order."""
        ordinals = [self._next_ordinal(r.agent_kind) for r in reqs]
        jobs = list(zip(reqs, ordinals))

        def run(k):
            req, ordinal = jobs[k]
            try:
                return self.gateway.dispatch(req, ordinal, self.scope)
            except Exception as exc:
                raise BatchError(k, exc) from exc

        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, range(len(jobs))))
        else:
            results = [run(k) for k in range(len(jobs))]
        with self._lock:
            for (req, ordinal), (resp, cached) in zip(jobs, results):
                self.calls.append(self._record(req, ordinal, resp, cached))
        return [resp for resp, _ in results]

    def accounting(self) -> dict[str, Any]:
        return summarize_calls(self.calls)


def agent_group(kind: str) -> str:
    return "memory" if kind.startswith(MEMORY_PREFIX) else kind


def summarize_calls(calls: Iterable[CallRecord]) -> dict[str, Any]:
    """Additive totals per agent kind plus an overall total."""
    blank = {
        "calls": 0,
        "backend_calls": 0,
        "cache_hits": 0,
        "prompt_tokens": 0,
        "completion_tokens": 0,
        "latency_s": 0.0,
    }
    by_agent: dict[str, dict[str, Any]] = {}
    total = dict(blank)
    for c in calls:
        row = by_agent.setdefault(c.agent_kind, dict(blank))
        for bucket in (row, total):
            bucket["calls"] += 1
            bucket["backend_calls"] += 0 if c.cached else 1
            bucket["cache_hits"] += 1 if c.cached else 0
            bucket["prompt_tokens"] += c.prompt_tokens
            bucket["completion_tokens"] += c.completion_tokens
            bucket["latency_s"] += c.latency
    return {"by_agent": dict(sorted(by_agent.items())), "total": total}


def call_log_dicts(calls: Iterable[CallRecord]) -> list[dict[str, Any]]:
    return [asdict(c) for c in calls]
