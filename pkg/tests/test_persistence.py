from __future__ import annotations

import json
import random
from datetime import timezone

import pytest

from reviver.domain import ChatTurn, GuidanceKind, InputKind, Phase, SessionState, Transcript, TurnAnnotations
from reviver.persistence import (
    ParseError,
    SchemaVersionError,
    dumps_tree,
    load_manifest,
    load_session,
    load_transcript,
    load_tree,
    save_session,
    save_transcript,
    save_tree,
    tree_from_dict,
    tree_to_dict,
)

from support import random_tree


def test_tree_round_trip_identity(three_scene_tree, tmp_path):
    path = tmp_path / "tree.json"
    save_tree(three_scene_tree, path)
    assert load_tree(path) == three_scene_tree


def test_round_trip_all_hand_trees(hand_trees, tmp_path):
    for index, tree in enumerate(hand_trees):
        path = tmp_path / f"t{index}.json"
        save_tree(tree, path)
        assert load_tree(path) == tree


def test_round_trip_random_trees(tmp_path):
    rng = random.Random(13)
    for index in range(20):
        tree, _ = random_tree(rng)
        path = tmp_path / f"r{index}.json"
        save_tree(tree, path)
        assert load_tree(path) == tree


def test_save_is_byte_stable(three_scene_tree):
    assert dumps_tree(three_scene_tree) == dumps_tree(three_scene_tree)


def test_truncated_file_is_parse_error_with_line_context(three_scene_tree, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(dumps_tree(three_scene_tree)[:50], encoding="utf-8")
    with pytest.raises(ParseError, match=r"line \d+"):
        load_tree(path)


def test_unknown_extra_fields_are_ignored(three_scene_tree, tmp_path):
    data = tree_to_dict(three_scene_tree)
    data["future_field"] = {"anything": 1}
    data["scenes"][0]["embedding"] = [0.1, 0.2]
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    assert load_tree(path) == three_scene_tree


def test_schema_version_mismatch_is_versioned_error(three_scene_tree, tmp_path):
    data = tree_to_dict(three_scene_tree)
    data["schema_version"] = 99
    path = tmp_path / "v99.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(SchemaVersionError):
        load_tree(path)


def test_missing_schema_version_is_versioned_error(three_scene_tree, tmp_path):
    data = tree_to_dict(three_scene_tree)
    del data["schema_version"]
    path = tmp_path / "nov.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(SchemaVersionError):
        load_tree(path)


def test_tree_dict_round_trip_without_files(five_scene_tree):
    assert tree_from_dict(tree_to_dict(five_scene_tree)) == five_scene_tree


# ---------------------------------------------------------------------------
# Manifest loading


def test_manifest_paths_resolve_relative_to_file(trip_manifest, fixtures_dir):
    base = fixtures_dir / "collections" / "trip"
    assert trip_manifest.photos[0].source_path == str(base / "photos" / "p1.png")
    assert trip_manifest.portrait_photo == str(base / "portrait.png")


def test_manifest_timestamps_are_utc(trip_manifest):
    stamp = trip_manifest.photos[0].timestamp
    assert stamp is not None and stamp.tzinfo == timezone.utc


def test_manifest_indices_follow_array_order(trip_manifest):
    assert [p.manifest_index for p in trip_manifest.photos] == list(range(8))


def test_invalid_manifest_raises(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(
        json.dumps({"collection_id": "x", "title": "x", "photos": [
            {"photo_id": "a", "source_path": "a.png"},
            {"photo_id": "a", "source_path": "b.png"},
        ]}),
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match="duplicate"):
        load_manifest(path)


# ---------------------------------------------------------------------------
# Transcripts and session state


def _sample_turns() -> list[ChatTurn]:
    return [
        ChatTurn(0, "bot", "opening", TurnAnnotations(guidance_kind=GuidanceKind.STORYLINE)),
        ChatTurn(1, "user", "Okay", TurnAnnotations(classified_as=InputKind.ACCEPTANCE)),
        ChatTurn(
            2,
            "bot",
            "reply",
            TurnAnnotations(selected_scene=1, guidance_kind=GuidanceKind.DETAIL, emitted_detail_id="s1-d1"),
        ),
        ChatTurn(3, "bot", "baseline style", TurnAnnotations(selected_photo_ids=["p1", "p2"])),
    ]


def test_transcript_round_trip(tmp_path):
    transcript = Transcript(collection_id="trip", engine="reviver", turns=_sample_turns(), seed=5)
    path = tmp_path / "t.json"
    save_transcript(transcript, path)
    assert load_transcript(path) == transcript


def test_session_round_trip(tmp_path):
    state = SessionState(
        session_id="s1",
        collection_id="trip",
        engine="reviver",
        current_scene=2,
        discussed_details={1: {"s1-d1", "s1-d2"}, 2: {"s2-d1"}},
        visited_scenes={1, 2},
        pending_suggestion=3,
        phase=Phase.EXPLORING,
        history=_sample_turns(),
    )
    path = tmp_path / "s.json"
    save_session(state, path)
    assert load_session(path) == state
