"""Parsers for agent outputs. Nothing here guesses: text that does not
match the expected shape raises ParseError."""
from __future__ import annotations

import json
import re

_FIRST_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)
_FENCE = re.compile(r"^```[a-zA-Z]*\s*\n?(.*?)\n?```$", re.DOTALL)

TRUE_WORDS = frozenset({"yes", "true"})
FALSE_WORDS = frozenset({"no", "false"})


class ParseError(ValueError):
    def __init__(self, message: str, component: str | None = None):
        super().__init__(f"[{component}] {message}" if component else message)
        self.component = component


def parse_binary(text: str) -> bool:
    """Read a yes/no answer from the leading word, ignoring case and
    surrounding punctuation."""
    m = _FIRST_WORD.search(text or "")
    if m is not None and not text[: m.start()].strip(" \t\r\n\"'`*.,:;!?()[]<>-"):
        word = m.group(0).lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
    raise ParseError(f"expected yes/no, got {text!r}")


def _strip_fence(text: str) -> str:
    text = text.strip()
    m = _FENCE.match(text)
    return m.group(1).strip() if m else text


def parse_json_map(text: str, component: str | None = None) -> dict[str, str]:
    """Parse a flat JSON object of string -> string; empty keys are dropped."""
    try:
        data = json.loads(_strip_fence(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", component) from exc
    if not isinstance(data, dict):
        raise ParseError(f"expected a JSON object, got {type(data).__name__}", component)
    out: dict[str, str] = {}
    for key, value in data.items():
        if not isinstance(value, str):
            raise ParseError(f"value for {key!r} is {type(value).__name__}, not a string", component)
        key = key.strip()
        if key:
            out[key] = value.strip()
    return out


def parse_summary(text: str, component: str | None = "summary") -> str:
    line = " ".join(_strip_fence(text).split())
    if not line:
        raise ParseError("empty summary", component)
    return line
