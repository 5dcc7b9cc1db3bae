"""Gateway backends: a deterministic fixture-driven mock and a live HTTP client.

Both receive the prompt-level ModelRequest plus a small task-specific
`meta` dict (photo ids, turn index, raw user input) that the mock needs
to key its fixture lookups; the live backend ignores it. The mock
produces model-shaped *text* so the gateway's parsing and retry paths
run identically in both modes.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from ..config import GatewayConfig
from .types import BackendTransportError, ModelRequest, ModelResponse, ModelTask


class Backend(Protocol):
    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse: ...

    @property
    def model_id(self) -> str: ...


# ---------------------------------------------------------------------------
# Fixture annotations (mock mode)


@dataclass
class FixtureScene:
    photos: list[str]
    activity: dict
    details: list[dict]
    summary: str


@dataclass
class FixtureAnnotations:
    """Per-collection annotation file driving the mock backend.

    Colocated with the collection manifest as `<stem>.annotations.json`.
    Every field is optional; the mock synthesizes deterministic content
    for anything not annotated.
    """

    descriptions: dict[str, str] = field(default_factory=dict)
    photo_tags: dict[str, list[str]] = field(default_factory=dict)
    pair_scores: dict[str, float | str] = field(default_factory=dict)
    scenes: list[FixtureScene] = field(default_factory=list)
    selection_tags: dict[str, list[str]] = field(default_factory=dict)
    replies: list[dict] = field(default_factory=list)
    force: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "FixtureAnnotations":
        return cls(
            descriptions=dict(data.get("descriptions") or {}),
            photo_tags={k: list(v) for k, v in (data.get("photo_tags") or {}).items()},
            pair_scores=dict(data.get("pair_scores") or {}),
            scenes=[
                FixtureScene(
                    photos=list(s["photos"]),
                    activity=dict(s.get("activity") or {}),
                    details=[dict(d) for d in s.get("details") or []],
                    summary=s.get("summary", ""),
                )
                for s in data.get("scenes") or []
            ],
            selection_tags={k: list(v) for k, v in (data.get("selection_tags") or {}).items()},
            replies=[dict(r) for r in data.get("replies") or []],
            force=dict(data.get("force") or {}),
        )


def load_annotations(path: str | Path) -> FixtureAnnotations:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return FixtureAnnotations.from_dict(data)


def annotations_path_for(manifest_path: str | Path) -> Path:
    p = Path(manifest_path)
    return p.with_name(p.stem + ".annotations.json")


class MockBackend:
    """Pure function of (request, meta) and the loaded fixture annotations."""

    def __init__(self, annotations: FixtureAnnotations | None = None):
        self.annotations = annotations or FixtureAnnotations()

    @property
    def model_id(self) -> str:
        return "mock"

    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse:
        if request.task.value in self.annotations.force.get("transport_fail_tasks", []):
            raise BackendTransportError(f"forced transport failure for {request.task.value}")
        handler = {
            ModelTask.DESCRIBE_PHOTO: self._describe,
            ModelTask.SCORE_SIMILARITY: self._score,
            ModelTask.EXTRACT_SCENE: self._extract_scene,
            ModelTask.GEN_STORYLINE: self._storyline,
            ModelTask.GEN_REPLY: self._reply,
            ModelTask.SELECT_PHOTOS: self._select,
        }[request.task]
        return ModelResponse(text=handler(meta), raw_latency_ms=0)

    def _describe(self, meta: dict) -> str:
        photo_id = meta["photo_id"]
        if photo_id in self.annotations.descriptions:
            return self.annotations.descriptions[photo_id]
        for tag in self.annotations.photo_tags.get(photo_id, []):
            if tag in self.annotations.descriptions:
                return self.annotations.descriptions[tag]
        return f"A photo ({photo_id}) from this collection, showing one moment of the event."

    def _score(self, meta: dict) -> str:
        id_a, id_b = meta["pair"]
        path_a, path_b = meta["paths"]
        if path_a == path_b:
            return "1.0"
        for key in (f"{id_a}|{id_b}", f"{id_b}|{id_a}"):
            if key in self.annotations.pair_scores:
                value = self.annotations.pair_scores[key]
                # Non-numeric annotations stand in for garbled model output.
                return value if isinstance(value, str) else repr(float(value))
        return "0.9"

    def _fixture_scene_number(self, photo_ids: list[str]) -> int | None:
        wanted = set(photo_ids)
        for number, scene in enumerate(self.annotations.scenes, start=1):
            if wanted == set(scene.photos):
                return number
        return None

    def _extract_scene(self, meta: dict) -> str:
        photo_ids = meta["photo_ids"]
        number = self._fixture_scene_number(photo_ids)
        if number is not None:
            scene = self.annotations.scenes[number - 1]
            payload = {"activity": scene.activity, "details": scene.details}
        else:
            span = f"{photo_ids[0]}..{photo_ids[-1]}" if len(photo_ids) > 1 else photo_ids[0]
            payload = {
                "activity": {
                    "sentence": f"An activity captured by photos {span}.",
                    "aspects": {"who": None, "what": f"activity around {photo_ids[0]}", "when": None, "where": None},
                    "reasons": [],
                },
                "details": [],
            }
        return "Here is the scene information.\n```json\n" + json.dumps(payload, ensure_ascii=False) + "\n```"

    def _storyline(self, meta: dict) -> str:
        sentences = list(meta["scene_sentences"])
        annotated = [s.summary for s in self.annotations.scenes]
        if len(annotated) == len(sentences) and annotated:
            summaries = annotated
        else:
            summaries = [f"Scene {i}: {s}" for i, s in enumerate(sentences, start=1)]
        if self.annotations.force.get("storyline_count_mismatch"):
            summaries = summaries[:-1]
        return "```json\n" + json.dumps(summaries, ensure_ascii=False) + "\n```"

    def _reply(self, meta: dict) -> str:
        user_input = meta["user_input"]
        if not user_input.strip():
            return ""
        photo_ids = meta["photo_ids"]
        number = self._fixture_scene_number(photo_ids)
        folded = user_input.casefold()
        for entry in self.annotations.replies:
            scene_ok = entry.get("scene") is None or entry.get("scene") == number
            if scene_ok and entry.get("keyword", "").casefold() in folded:
                return entry["text"]
        where = f"scene {number}" if number is not None else f"photos {photo_ids[0]}..{photo_ids[-1]}"
        return f"Mock reply about {where}, round {meta['turn_index']}."

    def _select(self, meta: dict) -> str:
        candidates = list(meta["candidate_ids"])
        folded = meta["user_input"].casefold()
        chosen: list[str] | None = None
        for tag, ids in self.annotations.selection_tags.items():
            if tag.casefold() in folded:
                chosen = [i for i in ids if i in candidates][:5]
                break
        if chosen is None:
            chosen = candidates[:5]
        if self.annotations.force.get("select_hallucinated_id"):
            chosen = ["not-a-real-photo"] + chosen[:4]
        return "```json\n" + json.dumps(chosen) + "\n```"


# ---------------------------------------------------------------------------
# Live HTTP backend (chat-completions style)

_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg", ".webp": "image/webp", ".gif": "image/gif"}


class HttpBackend:
    """JSON chat-completions endpoint with images attached as data URLs."""

    def __init__(self, config: GatewayConfig, api_key: str, client: httpx.Client | None = None):
        if not api_key:
            raise ValueError(f"live mode needs credentials in ${config.api_key_env}")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_s)
        self._headers = {"Authorization": f"Bearer {api_key}"}

    @property
    def model_id(self) -> str:
        return self.config.model_id

    def _image_part(self, path: str) -> dict:
        data = Path(path).read_bytes()
        media = _MEDIA_TYPES.get(Path(path).suffix.lower(), "image/jpeg")
        encoded = base64.b64encode(data).decode("ascii")
        return {"type": "image_url", "image_url": {"url": f"data:{media};base64,{encoded}"}}

    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse:
        content: list[dict] = [{"type": "text", "text": request.prompt_text}]
        content += [self._image_part(p) for p in request.image_refs]
        payload = {
            "model": self.config.model_id,
            "temperature": request.params.temperature,
            "messages": [{"role": "user", "content": content}],
        }
        started = time.monotonic()
        try:
            response = self._client.post(
                f"{self.config.api_base}/chat/completions", json=payload, headers=self._headers
            )
            response.raise_for_status()
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise BackendTransportError(str(exc)) from exc
        latency = int((time.monotonic() - started) * 1000)
        return ModelResponse(text=text if isinstance(text, str) else str(text), raw_latency_ms=latency)
