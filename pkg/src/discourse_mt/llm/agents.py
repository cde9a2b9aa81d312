"""Single-call helpers shared by the agents. An answer that fails to parse
gets one re-ask with a format reminder appended to the prompt."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, TypeVar

from .gateway import DEFAULT_TEMPERATURE, ChatRequest, Session
from .parsing import ParseError, parse_binary
from .prompts import BINARY_REASK

T = TypeVar("T")


@dataclass(frozen=True)
class AgentSettings:
    model_name: str = "mock"
    temperature: float = DEFAULT_TEMPERATURE
    workers: int = 1


def ask(
    session: Session,
    agent_kind: str,
    prompt: str,
    settings: AgentSettings,
    parser: Callable[[str], T],
    reask_suffix: str,
) -> T:
    req = ChatRequest(agent_kind, prompt, settings.model_name, settings.temperature)
    try:
        return parser(session.complete(req).text)
    except ParseError:
        retry = ChatRequest(agent_kind, prompt + reask_suffix, settings.model_name, settings.temperature)
        return parser(session.complete(retry).text)


def ask_binary(session: Session, agent_kind: str, prompt: str, settings: AgentSettings) -> bool:
    return ask(session, agent_kind, prompt, settings, parse_binary, BINARY_REASK)
