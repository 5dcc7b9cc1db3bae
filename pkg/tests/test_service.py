from __future__ import annotations

import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from reviver.config import AppConfig
from reviver.domain import GuidanceKind
from reviver.eval_harness import UserScript, run_scripted_session
from reviver.persistence import load_manifest, manifest_to_dict
from reviver.service import create_app

FIXTURES = Path(__file__).parent / "fixtures"


def _collection_body(name: str) -> dict:
    base = FIXTURES / "collections" / name
    manifest = manifest_to_dict(load_manifest(base / "manifest.json"))
    annotations = json.loads((base / "manifest.annotations.json").read_text(encoding="utf-8"))
    return {"manifest": manifest, "annotations": annotations}


@pytest.fixture
def app_config(tmp_path) -> AppConfig:
    config = AppConfig()
    config.store_dir = str(tmp_path / "store")
    config.gateway.mode = "mock"
    config.gateway.backoff_base_s = 0.0
    return config


@pytest.fixture
def client(app_config) -> TestClient:
    return TestClient(create_app(app_config))


def _wait_for_job(client: TestClient, job_id: str, timeout_s: float = 10.0) -> dict:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        body = client.get(f"/jobs/{job_id}").json()
        if body["status"] in ("done", "failed"):
            return body
        time.sleep(0.01)
    raise TimeoutError("build job did not finish")


def _build_collection(client: TestClient, name: str) -> str:
    created = client.post("/collections", json=_collection_body(name))
    assert created.status_code == 201
    collection_id = created.json()["collection_id"]
    accepted = client.post(f"/collections/{collection_id}/build", json={})
    assert accepted.status_code == 202
    job = _wait_for_job(client, accepted.json()["job_id"])
    assert job["status"] == "done", job
    return collection_id


# ---------------------------------------------------------------------------


def test_create_build_fetch_tree(client):
    collection_id = _build_collection(client, "trip")
    tree = client.get(f"/collections/{collection_id}/tree")
    assert tree.status_code == 200
    body = tree.json()
    assert len(body["scenes"]) == 3
    assert body["schema_version"] == 1


def test_invalid_manifest_is_422(client):
    body = _collection_body("trip")
    body["manifest"]["photos"][1]["photo_id"] = body["manifest"]["photos"][0]["photo_id"]
    response = client.post("/collections", json=body)
    assert response.status_code == 422
    assert "duplicate" in response.json()["detail"]


def test_unknown_ids_are_404(client):
    assert client.post("/collections/nope/build", json={}).status_code == 404
    assert client.get("/collections/nope/tree").status_code == 404
    assert client.get("/jobs/nope").status_code == 404
    assert client.get("/sessions/nope/state").status_code == 404
    assert client.post("/sessions/nope/message", json={"text": "x"}).status_code == 404
    assert client.post("/sessions", json={"collection_id": "nope", "engine": "reviver"}).status_code == 404


def test_reviver_session_requires_tree(client):
    created = client.post("/collections", json=_collection_body("trip"))
    collection_id = created.json()["collection_id"]
    response = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"})
    assert response.status_code == 409


def test_full_session_flow_with_progress(client):
    collection_id = _build_collection(client, "trip")
    created = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"})
    assert created.status_code == 201
    session_id = created.json()["session_id"]
    assert "storyline" in created.json()["opening_message"].lower() or "scene 1" in created.json()["opening_message"]

    first = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
    assert first.status_code == 200
    body = first.json()
    assert body["scene_id"] == 1
    assert body["guidance_kind"] == "activity_intro"
    assert body["progress"] == {"visited": 1, "total": 3}

    replies = [body]
    while replies[-1]["phase"] != "concluded":
        response = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
        assert response.status_code == 200
        replies.append(response.json())
        assert len(replies) < 30

    assert replies[-1]["guidance_kind"] == "final_summary"
    assert replies[-1]["progress"] == {"visited": 3, "total": 3}

    after = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
    assert after.status_code == 409
    assert after.json()["detail"]["phase"] == "concluded"

    transcript = client.get(f"/sessions/{session_id}/transcript").json()
    assert transcript["engine"] == "reviver"
    assert transcript["turns"][0]["annotations"]["guidance_kind"] == "storyline"

    state = client.get(f"/sessions/{session_id}/state").json()
    assert state["phase"] == "concluded"
    assert "history" not in state
    assert state["visited_scenes"] == [1, 2, 3]


def test_progress_after_accepting_scene_two(client):
    collection_id = _build_collection(client, "trip")
    session_id = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"}).json()[
        "session_id"
    ]
    texts = ["Okay", "Okay", "Okay", "Okay"]  # intro s1, d1, d2, suggestion of s2
    for text in texts:
        suggestion = client.post(f"/sessions/{session_id}/message", json={"text": text}).json()
    assert suggestion["guidance_kind"] == "scene_suggestion"
    accepted = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"}).json()
    assert accepted["scene_id"] == 2
    assert accepted["progress"] == {"visited": 2, "total": 3}


def test_concurrent_turn_is_409(client):
    collection_id = _build_collection(client, "trip")
    session_id = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"}).json()[
        "session_id"
    ]
    service = client.app.state.service
    lock = service.session_lock(session_id)
    assert lock.acquire(blocking=False)
    try:
        busy = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
        assert busy.status_code == 409
        assert "in flight" in busy.json()["detail"]
    finally:
        lock.release()
    ok = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
    assert ok.status_code == 200


def test_baseline_session_needs_no_tree(client):
    created = client.post("/collections", json=_collection_body("contrast"))
    collection_id = created.json()["collection_id"]  # no build job ever started
    session = client.post("/sessions", json={"collection_id": collection_id, "engine": "baseline"})
    assert session.status_code == 201
    reply = client.post(f"/sessions/{session.json()['session_id']}/message", json={"text": "Okay"})
    assert reply.status_code == 200
    assert reply.json()["progress"] == {"visited": 0, "total": 0}


def test_baseline_session_over_http(client):
    collection_id = _build_collection(client, "contrast")
    created = client.post("/sessions", json={"collection_id": collection_id, "engine": "baseline"})
    assert created.status_code == 201
    session_id = created.json()["session_id"]
    reply = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
    assert reply.status_code == 200
    body = reply.json()
    assert body["scene_id"] is None
    assert body["progress"] == {"visited": 1, "total": 3}
    transcript = client.get(f"/sessions/{session_id}/transcript").json()
    assert transcript["turns"][-1]["annotations"]["selected_photo_ids"] == ["c1", "c2"]


def test_gateway_failure_maps_to_502_with_retry_advice(client):
    body = _collection_body("trip")
    body["annotations"]["force"] = {"transport_fail_tasks": ["gen_reply"]}
    collection_id = client.post("/collections", json=body).json()["collection_id"]
    job = client.post(f"/collections/{collection_id}/build", json={}).json()
    assert _wait_for_job(client, job["job_id"])["status"] == "done"
    session_id = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"}).json()[
        "session_id"
    ]
    response = client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
    assert response.status_code == 502
    assert "retry_advice" in response.json()["detail"]
    transcript = client.get(f"/sessions/{session_id}/transcript").json()
    assert [t["speaker"] for t in transcript["turns"][-2:]] == ["user", "bot"]


def test_failed_build_job_reports_error(client):
    body = _collection_body("trip")
    body["annotations"]["pair_scores"]["p2|p3"] = "garbled nonsense"
    collection_id = client.post("/collections", json=body).json()["collection_id"]
    job = client.post(f"/collections/{collection_id}/build", json={}).json()
    finished = _wait_for_job(client, job["job_id"])
    assert finished["status"] == "failed"
    assert "(p2, p3)" in finished["error"]


def test_sessions_survive_restart(app_config):
    with TestClient(create_app(app_config)) as client:
        collection_id = _build_collection(client, "trip")
        session_id = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"}).json()[
            "session_id"
        ]
        client.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
        client.post(f"/sessions/{session_id}/message", json={"text": "Go on"})
        before = client.get(f"/sessions/{session_id}/transcript").json()

    with TestClient(create_app(app_config)) as restarted:
        after = restarted.get(f"/sessions/{session_id}/transcript").json()
        assert after == before
        resumed = restarted.post(f"/sessions/{session_id}/message", json={"text": "Okay"})
        assert resumed.status_code == 200
        assert resumed.json()["guidance_kind"] == "detail"


def test_api_transcript_matches_harness_transcript(client, trip_tree, trip_manifest, trip_gateway):
    collection_id = _build_collection(client, "trip")
    session_id = client.post("/sessions", json={"collection_id": collection_id, "engine": "reviver"}).json()[
        "session_id"
    ]
    steps = ["Okay", "Go on"] * 8
    for text in steps:
        response = client.post(f"/sessions/{session_id}/message", json={"text": text})
        if response.status_code == 409:
            break
    api_transcript = client.get(f"/sessions/{session_id}/transcript").json()

    harness_transcript, _ = run_scripted_session(
        "reviver", UserScript(steps=steps), trip_gateway, tree=trip_tree, manifest=trip_manifest
    )
    api_texts = [t["text"] for t in api_transcript["turns"]]
    harness_texts = [t.text for t in harness_transcript.turns]
    assert api_texts == harness_texts
