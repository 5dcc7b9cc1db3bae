"""Request/response envelope for the multimodal-model gateway."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ModelTask(str, Enum):
    DESCRIBE_PHOTO = "describe_photo"
    SCORE_SIMILARITY = "score_similarity"
    EXTRACT_SCENE = "extract_scene"
    GEN_STORYLINE = "gen_storyline"
    GEN_REPLY = "gen_reply"
    SELECT_PHOTOS = "select_photos"


@dataclass
class ModelParams:
    temperature: float = 0.8
    max_output_chars: int = 2000


@dataclass
class ModelRequest:
    task: ModelTask
    prompt_text: str
    image_refs: list[str] = field(default_factory=list)
    params: ModelParams = field(default_factory=ModelParams)


@dataclass
class ModelResponse:
    text: str
    parsed: object | None = None
    raw_latency_ms: int = 0


class GatewayError(Exception):
    """Model call failed after retries; carries the failing task id."""

    def __init__(self, task: ModelTask | str, message: str):
        self.task = task.value if isinstance(task, ModelTask) else task
        super().__init__(f"[{self.task}] {message}")


class BackendTransportError(Exception):
    """A single transport attempt failed; the gateway may retry."""
