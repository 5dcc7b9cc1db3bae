"""HTTP session service: collections, build jobs, sessions, transcripts.

Sessions are strictly serialized per session id (a busy session answers
409 rather than queueing — one human per reminiscence chat), while
distinct sessions and build jobs proceed concurrently. Everything is
persisted as JSON under the store directory, so sessions survive a
restart; photos stay on disk and only their paths are stored.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .baseline import BaselineEngine, DescriptionsNotReady, prepare_descriptions
from .config import AppConfig
from .dialogue import ReviverEngine, SessionConcluded, SessionRefused
from .domain import ChatTurn, CollectionManifest, GuidanceKind, MemoryTree, Phase, SessionState, Transcript
from .eval_harness import scene_coverage
from .gateway import (
    FixtureAnnotations,
    GatewayError,
    HttpBackend,
    MockBackend,
    ModelGateway,
    load_annotations,
)
from .persistence import (
    ParseError,
    load_manifest,
    load_session,
    load_tree,
    manifest_from_dict,
    manifest_to_dict,
    save_session,
    save_tree,
    session_to_dict,
    transcript_to_dict,
    tree_to_dict,
)
from .tree_builder import BuildError, build_memory_tree

# Mock builds stamp a fixed instant so rebuilds are byte-identical.
MOCK_BUILT_AT = datetime(2000, 1, 1, tzinfo=timezone.utc)

RETRY_ADVICE = "transient model failure; resend the same message"


class CollectionBody(BaseModel):
    manifest: dict
    annotations: dict | None = None


class BuildBody(BaseModel):
    threshold: float | None = None
    mode: str | None = None


class SessionBody(BaseModel):
    collection_id: str
    engine: str = "reviver"


class MessageBody(BaseModel):
    text: str


@dataclass
class BuildJob:
    job_id: str
    collection_id: str
    status: str = "pending"  # pending | running | done | failed
    error: str | None = None


@dataclass
class ServiceState:
    config: AppConfig
    store_dir: Path
    manifests: dict[str, CollectionManifest] = field(default_factory=dict)
    annotations: dict[str, FixtureAnnotations] = field(default_factory=dict)
    trees: dict[str, MemoryTree] = field(default_factory=dict)
    sessions: dict[str, SessionState] = field(default_factory=dict)
    jobs: dict[str, BuildJob] = field(default_factory=dict)
    locks: dict[str, threading.Lock] = field(default_factory=dict)
    workers: ThreadPoolExecutor = field(default_factory=lambda: ThreadPoolExecutor(max_workers=2))
    registry_lock: threading.Lock = field(default_factory=threading.Lock)

    # -- paths -------------------------------------------------------------

    def _manifest_path(self, collection_id: str) -> Path:
        return self.store_dir / "manifests" / f"{collection_id}.json"

    def _annotations_path(self, collection_id: str) -> Path:
        return self.store_dir / "manifests" / f"{collection_id}.annotations.json"

    def _tree_path(self, collection_id: str) -> Path:
        return self.store_dir / "trees" / f"{collection_id}.json"

    def _session_path(self, session_id: str) -> Path:
        return self.store_dir / "sessions" / f"{session_id}.json"

    # -- lookup with lazy disk fallback (restart survival) -------------------

    def get_manifest(self, collection_id: str) -> CollectionManifest | None:
        if collection_id not in self.manifests and self._manifest_path(collection_id).exists():
            self.manifests[collection_id] = load_manifest(self._manifest_path(collection_id))
            annotations_path = self._annotations_path(collection_id)
            if annotations_path.exists():
                self.annotations[collection_id] = load_annotations(annotations_path)
        return self.manifests.get(collection_id)

    def get_tree(self, collection_id: str) -> MemoryTree | None:
        if collection_id not in self.trees and self._tree_path(collection_id).exists():
            self.trees[collection_id] = load_tree(self._tree_path(collection_id))
        return self.trees.get(collection_id)

    def get_session(self, session_id: str) -> SessionState | None:
        if session_id not in self.sessions and self._session_path(session_id).exists():
            self.sessions[session_id] = load_session(self._session_path(session_id))
        return self.sessions.get(session_id)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    # -- gateways and engines ------------------------------------------------

    def gateway_for(self, collection_id: str, mode: str | None = None) -> ModelGateway:
        gw_config = self.config.gateway
        mode = mode or gw_config.mode
        if mode == "mock":
            backend = MockBackend(self.annotations.get(collection_id))
            return ModelGateway(backend, gw_config)
        api_key = os.environ.get(gw_config.api_key_env, "")
        return ModelGateway(HttpBackend(gw_config, api_key), gw_config)

    def engine_for(self, state: SessionState):
        manifest = self.get_manifest(state.collection_id)
        if manifest is None:
            raise HTTPException(404, detail=f"unknown collection {state.collection_id}")
        gateway = self.gateway_for(state.collection_id)
        if state.engine == "baseline":
            return BaselineEngine(manifest, gateway, self.config.dialogue)
        tree = self.get_tree(state.collection_id)
        if tree is None:
            raise HTTPException(409, detail=f"collection {state.collection_id} has no memory tree yet")
        return ReviverEngine(tree, manifest, gateway, self.config.dialogue)

    def progress_for(self, state: SessionState) -> dict:
        tree = self.get_tree(state.collection_id)
        if tree is None:
            return {"visited": 0, "total": 0}
        if state.engine == "reviver":
            return {"visited": len(state.visited_scenes), "total": len(tree.scenes)}
        transcript = Transcript(state.collection_id, state.engine, state.history)
        covered = scene_coverage(transcript, tree, "baseline")
        return {"visited": round(covered * len(tree.scenes)), "total": len(tree.scenes)}


def _is_error_turn(turn: ChatTurn) -> bool:
    a = turn.annotations
    return (
        a.guidance_kind is GuidanceKind.NONE
        and a.selected_scene is None
        and a.selected_photo_ids is None
        and a.emitted_detail_id is None
    )


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    store_dir = Path(config.store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    service = ServiceState(config=config, store_dir=store_dir)

    app = FastAPI(title="reviver", version="0.1.0")
    app.state.service = service

    # -- collections ---------------------------------------------------------

    @app.post("/collections", status_code=201)
    def create_collection(body: CollectionBody):
        try:
            manifest = manifest_from_dict(body.manifest)
        except (KeyError, ValueError, ParseError) as exc:
            raise HTTPException(422, detail=f"invalid manifest: {exc}")
        problems = manifest.problems()
        if problems:
            raise HTTPException(422, detail="invalid manifest: " + "; ".join(problems))
        service.manifests[manifest.collection_id] = manifest
        path = service._manifest_path(manifest.collection_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest_to_dict(manifest), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        if body.annotations is not None:
            service.annotations[manifest.collection_id] = FixtureAnnotations.from_dict(body.annotations)
            service._annotations_path(manifest.collection_id).write_text(
                json.dumps(body.annotations, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )
        return {"collection_id": manifest.collection_id}

    @app.post("/collections/{collection_id}/build", status_code=202)
    def start_build(collection_id: str, body: BuildBody):
        manifest = service.get_manifest(collection_id)
        if manifest is None:
            raise HTTPException(404, detail=f"unknown collection {collection_id}")
        job = BuildJob(job_id=uuid.uuid4().hex, collection_id=collection_id)
        service.jobs[job.job_id] = job
        threshold = body.threshold if body.threshold is not None else service.config.build.similarity_threshold
        mode = body.mode or service.config.gateway.mode

        def run() -> None:
            job.status = "running"
            try:
                gateway = service.gateway_for(collection_id, mode)
                tree = build_memory_tree(
                    manifest,
                    gateway,
                    threshold=threshold,
                    workers=service.config.build.scorer_workers,
                    built_at=MOCK_BUILT_AT if mode == "mock" else None,
                )
                save_tree(tree, service._tree_path(collection_id))
                service.trees[collection_id] = tree
                job.status = "done"
            except (BuildError, GatewayError, ValueError) as exc:
                job.status = "failed"
                job.error = str(exc)

        service.workers.submit(run)
        return {"job_id": job.job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = service.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, detail=f"unknown job {job_id}")
        return {"job_id": job.job_id, "collection_id": job.collection_id, "status": job.status, "error": job.error}

    @app.get("/collections/{collection_id}/tree")
    def get_tree(collection_id: str):
        tree = service.get_tree(collection_id)
        if tree is None:
            raise HTTPException(404, detail=f"no tree for collection {collection_id}")
        return tree_to_dict(tree)

    # -- sessions --------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody):
        manifest = service.get_manifest(body.collection_id)
        if manifest is None:
            raise HTTPException(404, detail=f"unknown collection {body.collection_id}")
        if body.engine not in ("reviver", "baseline"):
            raise HTTPException(422, detail=f"unknown engine {body.engine!r}")
        session_id = uuid.uuid4().hex
        gateway = service.gateway_for(body.collection_id)
        if body.engine == "baseline":
            report = prepare_descriptions(manifest, gateway)
            if not report.complete:
                raise HTTPException(
                    502,
                    detail={"error": f"description generation failed for {sorted(report.failures)}",
                            "retry_advice": RETRY_ADVICE},
                )
            engine = BaselineEngine(manifest, gateway, service.config.dialogue)
        else:
            tree = service.get_tree(body.collection_id)
            if tree is None:
                raise HTTPException(409, detail=f"collection {body.collection_id} has no memory tree yet")
            engine = ReviverEngine(tree, manifest, gateway, service.config.dialogue)
        try:
            state, opening = engine.start_session(session_id)
        except SessionRefused as exc:
            raise HTTPException(422, detail=f"tree failed validation: {exc.report}")
        service.sessions[session_id] = state
        save_session(state, service._session_path(session_id))
        return {"session_id": session_id, "opening_message": opening.text}

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, body: MessageBody):
        state = service.get_session(session_id)
        if state is None:
            raise HTTPException(404, detail=f"unknown session {session_id}")
        lock = service.session_lock(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(409, detail="a turn is already in flight for this session")
        try:
            if state.phase is Phase.CONCLUDED:
                raise HTTPException(409, detail={"error": "session concluded", "phase": state.phase.value})
            engine = service.engine_for(state)
            try:
                turn = engine.reply(state, body.text)
            except SessionConcluded:
                raise HTTPException(409, detail={"error": "session concluded", "phase": state.phase.value})
            save_session(state, service._session_path(session_id))
            if _is_error_turn(turn):
                raise HTTPException(502, detail={"error": turn.text, "retry_advice": RETRY_ADVICE})
            return {
                "reply": turn.text,
                "guidance_kind": turn.annotations.guidance_kind.value if turn.annotations.guidance_kind else None,
                "scene_id": turn.annotations.selected_scene,
                "phase": state.phase.value,
                "progress": service.progress_for(state),
            }
        finally:
            lock.release()

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str):
        state = service.get_session(session_id)
        if state is None:
            raise HTTPException(404, detail=f"unknown session {session_id}")
        projection = session_to_dict(state)
        projection.pop("history", None)
        projection["turn_count"] = len(state.history)
        projection["progress"] = service.progress_for(state)
        return projection

    @app.get("/sessions/{session_id}/transcript")
    def session_transcript(session_id: str):
        state = service.get_session(session_id)
        if state is None:
            raise HTTPException(404, detail=f"unknown session {session_id}")
        transcript = Transcript(collection_id=state.collection_id, engine=state.engine, turns=state.history)
        return transcript_to_dict(transcript)

    return app
