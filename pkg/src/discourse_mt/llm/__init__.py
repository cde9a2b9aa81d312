from .gateway import (
    EDGE,
    SEGMENTATION,
    TRANSLATION,
    AuthenticationError,
    BackendResponse,
    CallRecord,
    ChatRequest,
    Gateway,
    GatewayError,
    HttpBackend,
    MalformedResponseError,
    MockBackend,
    MockScriptError,
    BatchError,
    RequestRejectedError,
    ResponseCache,
    Session,
    TransportError,
    summarize_calls,
)
from .parsing import ParseError, parse_binary, parse_json_map, parse_summary
from .prompts import PromptLibrary, PromptTemplate, RenderError, render, render_memory
from .agents import AgentSettings, ask, ask_binary
