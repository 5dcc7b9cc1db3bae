"""JSON persistence for trees, manifests, transcripts, and session state.

All files are UTF-8 JSON with a schema_version field and stable key order
so that mock-mode runs are byte-reproducible. Unknown keys are ignored on
load (forward compatibility); a different schema_version is an error.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from .domain import (
    BuildMetadata,
    ChatTurn,
    CollectionManifest,
    DetailCategory,
    GuidanceKind,
    InputKind,
    MemoryTree,
    Phase,
    PhotoRecord,
    Scene,
    SceneActivity,
    SceneDetail,
    SessionState,
    StorylineEntry,
    Transcript,
    TurnAnnotations,
)

TREE_SCHEMA_VERSION = 1
TRANSCRIPT_SCHEMA_VERSION = 1
SESSION_SCHEMA_VERSION = 1


class PersistenceError(Exception):
    pass


class ParseError(PersistenceError):
    """Malformed file; message carries line/column context."""


class SchemaVersionError(PersistenceError):
    def __init__(self, path: str, found: object, expected: int):
        super().__init__(f"{path}: schema_version {found!r}, this build reads version {expected}")
        self.found = found
        self.expected = expected


def iso_instant(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_instant(text: str) -> datetime:
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _read_json(path: str | Path) -> dict:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    return data


def _write_text(path: str | Path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def _check_version(data: dict, path: str | Path, expected: int) -> None:
    found = data.get("schema_version")
    if found != expected:
        raise SchemaVersionError(str(path), found, expected)


# ---------------------------------------------------------------------------
# Memory tree


def activity_to_dict(activity: SceneActivity) -> dict:
    return {
        "sentence": activity.sentence,
        "aspects": {k: activity.aspects.get(k) for k in ("who", "what", "when", "where")},
        "reasons": list(activity.reasons),
        "char_budget": activity.char_budget,
    }


def activity_from_dict(data: dict) -> SceneActivity:
    aspects = data.get("aspects") or {}
    return SceneActivity(
        sentence=data.get("sentence", ""),
        aspects={k: aspects.get(k) for k in ("who", "what", "when", "where")},
        reasons=list(data.get("reasons") or []),
        char_budget=int(data.get("char_budget", 100)),
    )


def scene_to_dict(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "photo_ids": list(scene.photo_ids),
        "activity": activity_to_dict(scene.activity),
        "details": [
            {"detail_id": d.detail_id, "category": d.category.value, "description": d.description}
            for d in scene.details
        ],
        "summary_sentence": scene.summary_sentence,
    }


def scene_from_dict(data: dict) -> Scene:
    return Scene(
        scene_id=int(data["scene_id"]),
        photo_ids=list(data.get("photo_ids") or []),
        activity=activity_from_dict(data.get("activity") or {}),
        details=[
            SceneDetail(
                detail_id=d["detail_id"],
                category=DetailCategory(d["category"]),
                description=d.get("description", ""),
            )
            for d in data.get("details") or []
        ],
        summary_sentence=data.get("summary_sentence", ""),
    )


def tree_to_dict(tree: MemoryTree) -> dict:
    return {
        "schema_version": TREE_SCHEMA_VERSION,
        "collection_id": tree.collection_id,
        "storyline": [{"scene_id": e.scene_id, "summary": e.summary} for e in tree.storyline],
        "scenes": [scene_to_dict(s) for s in tree.scenes],
        "build_metadata": {
            "similarity_threshold": tree.build_metadata.similarity_threshold,
            "model_id": tree.build_metadata.model_id,
            "built_at": iso_instant(tree.build_metadata.built_at),
        },
    }


def tree_from_dict(data: dict) -> MemoryTree:
    meta = data.get("build_metadata") or {}
    return MemoryTree(
        collection_id=data.get("collection_id", ""),
        storyline=[
            StorylineEntry(scene_id=int(e["scene_id"]), summary=e.get("summary", ""))
            for e in data.get("storyline") or []
        ],
        scenes=[scene_from_dict(s) for s in data.get("scenes") or []],
        build_metadata=BuildMetadata(
            similarity_threshold=float(meta.get("similarity_threshold", 0.5)),
            model_id=meta.get("model_id", ""),
            built_at=parse_instant(meta.get("built_at", "1970-01-01T00:00:00Z")),
        ),
    )


def dumps_tree(tree: MemoryTree) -> str:
    return json.dumps(tree_to_dict(tree), indent=2, ensure_ascii=False) + "\n"


def save_tree(tree: MemoryTree, path: str | Path) -> None:
    _write_text(path, dumps_tree(tree))


def load_tree(path: str | Path) -> MemoryTree:
    data = _read_json(path)
    _check_version(data, path, TREE_SCHEMA_VERSION)
    return tree_from_dict(data)


# ---------------------------------------------------------------------------
# Collection manifest


def manifest_from_dict(data: dict, base_dir: str | Path | None = None) -> CollectionManifest:
    base = Path(base_dir) if base_dir is not None else None

    def resolve(p: str | None) -> str | None:
        if p is None:
            return None
        path = Path(p)
        if base is not None and not path.is_absolute():
            path = base / path
        return str(path)

    photos = []
    for index, entry in enumerate(data.get("photos") or []):
        ts = entry.get("timestamp")
        photos.append(
            PhotoRecord(
                photo_id=entry["photo_id"],
                source_path=resolve(entry["source_path"]) or "",
                timestamp=parse_instant(ts) if ts else None,
                manifest_index=index,
                cached_description=entry.get("cached_description"),
            )
        )
    return CollectionManifest(
        collection_id=data.get("collection_id", ""),
        title=data.get("title", ""),
        photos=photos,
        portrait_photo=resolve(data.get("portrait_photo")),
        locale=data.get("locale", "en"),
    )


def manifest_to_dict(manifest: CollectionManifest) -> dict:
    return {
        "collection_id": manifest.collection_id,
        "title": manifest.title,
        "photos": [
            {
                "photo_id": p.photo_id,
                "source_path": p.source_path,
                **({"timestamp": iso_instant(p.timestamp)} if p.timestamp else {}),
                **({"cached_description": p.cached_description} if p.cached_description else {}),
            }
            for p in manifest.photos
        ],
        **({"portrait_photo": manifest.portrait_photo} if manifest.portrait_photo else {}),
        "locale": manifest.locale,
    }


def load_manifest(path: str | Path) -> CollectionManifest:
    data = _read_json(path)
    manifest = manifest_from_dict(data, base_dir=Path(path).parent)
    problems = manifest.problems()
    if problems:
        raise ParseError(f"{path}: invalid manifest: " + "; ".join(problems))
    return manifest


# ---------------------------------------------------------------------------
# Chat turns, transcripts, session state


def _annotations_to_dict(a: TurnAnnotations) -> dict:
    return {
        "selected_scene": a.selected_scene,
        "classified_as": a.classified_as.value if a.classified_as else None,
        "guidance_kind": a.guidance_kind.value if a.guidance_kind else None,
        "emitted_detail_id": a.emitted_detail_id,
        "selected_photo_ids": list(a.selected_photo_ids) if a.selected_photo_ids is not None else None,
    }


def _annotations_from_dict(data: dict) -> TurnAnnotations:
    return TurnAnnotations(
        selected_scene=data.get("selected_scene"),
        classified_as=InputKind(data["classified_as"]) if data.get("classified_as") else None,
        guidance_kind=GuidanceKind(data["guidance_kind"]) if data.get("guidance_kind") else None,
        emitted_detail_id=data.get("emitted_detail_id"),
        selected_photo_ids=(
            list(data["selected_photo_ids"]) if data.get("selected_photo_ids") is not None else None
        ),
    )


def turn_to_dict(turn: ChatTurn) -> dict:
    return {
        "turn_index": turn.turn_index,
        "speaker": turn.speaker,
        "text": turn.text,
        "annotations": _annotations_to_dict(turn.annotations),
    }


def turn_from_dict(data: dict) -> ChatTurn:
    return ChatTurn(
        turn_index=int(data["turn_index"]),
        speaker=data["speaker"],
        text=data.get("text", ""),
        annotations=_annotations_from_dict(data.get("annotations") or {}),
    )


def transcript_to_dict(transcript: Transcript) -> dict:
    return {
        "schema_version": TRANSCRIPT_SCHEMA_VERSION,
        "collection_id": transcript.collection_id,
        "engine": transcript.engine,
        "seed": transcript.seed,
        "turns": [turn_to_dict(t) for t in transcript.turns],
    }


def transcript_from_dict(data: dict) -> Transcript:
    return Transcript(
        collection_id=data.get("collection_id", ""),
        engine=data.get("engine", ""),
        seed=data.get("seed"),
        turns=[turn_from_dict(t) for t in data.get("turns") or []],
    )


def dumps_transcript(transcript: Transcript) -> str:
    return json.dumps(transcript_to_dict(transcript), indent=2, ensure_ascii=False) + "\n"


def save_transcript(transcript: Transcript, path: str | Path) -> None:
    _write_text(path, dumps_transcript(transcript))


def load_transcript(path: str | Path) -> Transcript:
    data = _read_json(path)
    _check_version(data, path, TRANSCRIPT_SCHEMA_VERSION)
    return transcript_from_dict(data)


def session_to_dict(state: SessionState) -> dict:
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session_id": state.session_id,
        "collection_id": state.collection_id,
        "engine": state.engine,
        "current_scene": state.current_scene,
        "discussed_details": {str(k): sorted(v) for k, v in sorted(state.discussed_details.items())},
        "visited_scenes": sorted(state.visited_scenes),
        "pending_suggestion": state.pending_suggestion,
        "phase": state.phase.value,
        "history": [turn_to_dict(t) for t in state.history],
    }


def session_from_dict(data: dict) -> SessionState:
    return SessionState(
        session_id=data["session_id"],
        collection_id=data.get("collection_id", ""),
        engine=data.get("engine", "reviver"),
        current_scene=int(data.get("current_scene", 1)),
        discussed_details={int(k): set(v) for k, v in (data.get("discussed_details") or {}).items()},
        visited_scenes=set(data.get("visited_scenes") or []),
        pending_suggestion=data.get("pending_suggestion"),
        phase=Phase(data.get("phase", "opened")),
        history=[turn_from_dict(t) for t in data.get("history") or []],
    )


def save_session(state: SessionState, path: str | Path) -> None:
    _write_text(path, json.dumps(session_to_dict(state), indent=2, ensure_ascii=False) + "\n")


def load_session(path: str | Path) -> SessionState:
    data = _read_json(path)
    _check_version(data, path, SESSION_SCHEMA_VERSION)
    return session_from_dict(data)
