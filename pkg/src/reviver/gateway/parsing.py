"""Tolerant parsers for model output.

Structured payloads are requested as fenced JSON blocks; replies often
wrap them in prose, so extraction scans for a fenced block first and
falls back to the first balanced JSON value in the text.
"""

from __future__ import annotations

import json
import re

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


class StructuredParseError(ValueError):
    pass


def extract_json_block(text: str):
    """Pull the first JSON object/array out of a model reply."""
    fenced = _FENCE_RE.search(text)
    if fenced:
        candidate = fenced.group(1).strip()
        try:
            return json.loads(candidate)
        except json.JSONDecodeError as exc:
            raise StructuredParseError(f"fenced block is not valid JSON: {exc.msg}") from exc
    for opener, closer in (("{", "}"), ("[", "]")):
        start = text.find(opener)
        while start != -1:
            depth = 0
            in_string = False
            escaped = False
            for i in range(start, len(text)):
                ch = text[i]
                if in_string:
                    if escaped:
                        escaped = False
                    elif ch == "\\":
                        escaped = True
                    elif ch == '"':
                        in_string = False
                    continue
                if ch == '"':
                    in_string = True
                elif ch == opener:
                    depth += 1
                elif ch == closer:
                    depth -= 1
                    if depth == 0:
                        try:
                            return json.loads(text[start : i + 1])
                        except json.JSONDecodeError:
                            break
            start = text.find(opener, start + 1)
    raise StructuredParseError("no JSON payload found in model reply")


def parse_similarity(text: str) -> float:
    """First numeric token in the reply, clamped to [0, 1]."""
    match = _NUMBER_RE.search(text)
    if not match:
        raise StructuredParseError(f"no numeric score in model reply: {text[:80]!r}")
    return clamp01(float(match.group()))


def clamp01(value: float) -> float:
    return max(0.0, min(1.0, value))


def truncate_at_sentence(text: str, budget: int) -> str:
    """Cut at the last sentence boundary within budget, else hard-cut."""
    if len(text) <= budget:
        return text
    window = text[:budget]
    best = max(window.rfind(mark) for mark in (".", "!", "?", "。"))
    if best > 0:
        return window[: best + 1]
    return window.rstrip()
