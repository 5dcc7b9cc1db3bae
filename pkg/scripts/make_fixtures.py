#!/usr/bin/env python3
"""Regenerate the test fixtures: tiny photo files, collection manifests,
mock annotation files, hand-authored tree files, and user scripts.

Idempotent; outputs land under tests/fixtures/. Detail descriptions are
written with distinctive vocabulary on purpose: the dialogue engine's
already-mentioned check skips a detail when most of its content tokens
appeared in one earlier turn, and fixture details must never trip it by
accident.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from PIL import Image

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from reviver.domain import (  # noqa: E402
    BuildMetadata,
    DetailCategory,
    MemoryTree,
    Scene,
    SceneActivity,
    SceneDetail,
    StorylineEntry,
)
from reviver.persistence import save_tree  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"


def write_png(path: Path, rgb: tuple[int, int, int]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (4, 4), rgb).save(path)


def write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def day_time(hour: int, minute: int = 0) -> str:
    return datetime(2024, 5, 1, hour, minute, tzinfo=timezone.utc).isoformat().replace("+00:00", "Z")


# ---------------------------------------------------------------------------
# trip: 8 photos, 3 scenes (2/3/3 photos, 2/3/4 details), full annotations


def make_trip() -> None:
    base = FIXTURES / "collections" / "trip"
    photo_ids = [f"p{i}" for i in range(1, 9)]
    hours = [(9, 0), (9, 5), (12, 0), (12, 10), (12, 20), (15, 0), (15, 30), (16, 0)]
    for index, pid in enumerate(photo_ids):
        write_png(base / "photos" / f"{pid}.png", (40 + index * 25, 80, 200 - index * 20))
    write_png(base / "portrait.png", (250, 200, 150))

    manifest = {
        "collection_id": "trip",
        "title": "A day out with a friend",
        "photos": [
            {"photo_id": pid, "source_path": f"photos/{pid}.png", "timestamp": day_time(*hours[i])}
            for i, pid in enumerate(photo_ids)
        ],
        "portrait_photo": "portrait.png",
        "locale": "en",
    }
    write_json(base / "manifest.json", manifest)

    annotations = {
        "descriptions": {
            "p1": "A sandy beach under a pale morning sky, two figures strolling by the waterline.",
            "p2": "Waves rolling in as a striped kite climbs over the shore.",
            "p3": "The entrance of a busy student canteen with a sign over the door.",
            "p4": "A lunch tray with dumplings and soup on a long table.",
            "p5": "A red banner hanging over the serving counter of the canteen.",
            "p6": "The stone facade of the city museum behind a fountain.",
            "p7": "A bronze sculpture of a horse inside a bright gallery.",
            "p8": "A brass plaque describing the museum's founding year.",
        },
        "photo_tags": {
            "p1": ["beach_walk"],
            "p2": ["beach_walk"],
            "p3": ["canteen"],
            "p4": ["canteen"],
            "p5": ["canteen"],
            "p6": ["museum"],
            "p7": ["museum"],
            "p8": ["museum"],
        },
        "pair_scores": {
            "p1|p2": 0.9,
            "p2|p3": 0.3,
            "p3|p4": 0.8,
            "p4|p5": 0.7,
            "p5|p6": 0.2,
            "p6|p7": 0.9,
            "p7|p8": 0.6,
        },
        "scenes": [
            {
                "photos": ["p1", "p2"],
                "activity": {
                    "sentence": "You strolled along the beach with a friend early in the morning.",
                    "aspects": {
                        "who": "you and a friend",
                        "what": "a stroll by the water",
                        "when": "early morning",
                        "where": "a sandy beach",
                    },
                    "reasons": [
                        "The long shadows and pale light suggest early morning.",
                        "Footprints lead along the waterline beside you both.",
                    ],
                },
                "details": [
                    {"category": "people", "description": "Two companions walking barefoot, trousers rolled up to their knees."},
                    {"category": "others", "description": "A striped kite with a long yellow tail climbing over the surf."},
                ],
                "summary": "First, a morning stroll on the sandy beach.",
            },
            {
                "photos": ["p3", "p4", "p5"],
                "activity": {
                    "sentence": "You had lunch with two classmates at the student canteen around noon.",
                    "aspects": {
                        "who": "you and two classmates",
                        "what": "having lunch together",
                        "when": "around noon",
                        "where": "the student canteen",
                    },
                    "reasons": [
                        "It looked like a canteen because of the 'student canteen' sign at the entrance.",
                        "The wall clock above the counter reads five past twelve.",
                    ],
                },
                "details": [
                    {"category": "food", "description": "A tray holding steamed dumplings and a bowl of tomato egg soup."},
                    {"category": "texts", "description": "A crimson banner over the serving counter welcoming newcomers."},
                    {"category": "people", "description": "A server wearing a white apron handing trays across the glass divider."},
                ],
                "summary": "Then, lunch at the student canteen.",
            },
            {
                "photos": ["p6", "p7", "p8"],
                "activity": {
                    "sentence": "You visited the city museum in the late afternoon to see its galleries.",
                    "aspects": {
                        "who": "you",
                        "what": "touring the galleries",
                        "when": "late afternoon",
                        "where": "the city museum",
                    },
                    "reasons": [
                        "A ticket stub for the museum is visible in your hand.",
                        "The fountain square matches the museum forecourt.",
                    ],
                },
                "details": [
                    {"category": "buildings", "description": "A grey stone facade with six fluted columns and wide granite steps."},
                    {"category": "texts", "description": "A brass plaque engraved with the founding year 1911."},
                    {"category": "others", "description": "A bronze horse sculpture rearing on a marble pedestal."},
                    {"category": "plants", "description": "A row of potted ferns lining the staircase railing."},
                ],
                "summary": "Finally, an afternoon visit to the city museum.",
            },
        ],
        "selection_tags": {
            "beach": ["p1", "p2"],
            "canteen": ["p3", "p4", "p5"],
            "museum": ["p6", "p7", "p8"],
        },
        "replies": [
            {"scene": 2, "keyword": "dress", "text": "The dress in those photos is a light blue one with white dots."}
        ],
    }
    write_json(base / "manifest.annotations.json", annotations)


# ---------------------------------------------------------------------------
# contrast: compliant-input photo selections confined to scene 1


def make_contrast() -> None:
    base = FIXTURES / "collections" / "contrast"
    photo_ids = [f"c{i}" for i in range(1, 7)]
    for index, pid in enumerate(photo_ids):
        write_png(base / "photos" / f"{pid}.png", (200 - index * 30, 60 + index * 30, 90))
    manifest = {
        "collection_id": "contrast",
        "title": "Garden party",
        "photos": [
            {"photo_id": pid, "source_path": f"photos/{pid}.png", "timestamp": day_time(10 + i)}
            for i, pid in enumerate(photo_ids)
        ],
        "locale": "en",
    }
    write_json(base / "manifest.json", manifest)

    annotations = {
        "descriptions": {pid: f"Garden party photo {pid} with guests on the lawn." for pid in photo_ids},
        "pair_scores": {
            "c1|c2": 0.9,
            "c2|c3": 0.2,
            "c3|c4": 0.9,
            "c4|c5": 0.3,
            "c5|c6": 0.8,
        },
        "scenes": [
            {
                "photos": ["c1", "c2"],
                "activity": {
                    "sentence": "Guests arrived at the garden gate around mid-morning.",
                    "aspects": {"who": "arriving guests", "what": "greetings at the gate", "when": "mid-morning", "where": "the garden gate"},
                    "reasons": ["Invitation cards are visible in several hands."],
                },
                "details": [
                    {"category": "people", "description": "A greeter pinning paper corsages onto lapels."}
                ],
                "summary": "First, guests arriving at the garden gate.",
            },
            {
                "photos": ["c3", "c4"],
                "activity": {
                    "sentence": "Everyone shared a long lunch under the pergola at noon.",
                    "aspects": {"who": "all the guests", "what": "a shared lunch", "when": "noon", "where": "under the pergola"},
                    "reasons": ["Plates and carafes crowd the trestle table."],
                },
                "details": [
                    {"category": "food", "description": "A lemon tart cut into uneven generous wedges."}
                ],
                "summary": "Then, a long lunch under the pergola.",
            },
            {
                "photos": ["c5", "c6"],
                "activity": {
                    "sentence": "A small band played while couples danced at dusk.",
                    "aspects": {"who": "a small band and dancing couples", "what": "music and dancing", "when": "dusk", "where": "the lawn"},
                    "reasons": ["String lights glow against a darkening sky."],
                },
                "details": [
                    {"category": "others", "description": "An accordion resting against a folding chair between songs."}
                ],
                "summary": "Finally, music and dancing at dusk.",
            },
        ],
        "selection_tags": {
            "okay": ["c1", "c2"],
            "go on": ["c2", "c1"],
            "go ahead": ["c1"],
            "sure": ["c2"],
        },
    }
    write_json(base / "manifest.annotations.json", annotations)


# ---------------------------------------------------------------------------
# single: one photo, one scene


def make_single() -> None:
    base = FIXTURES / "collections" / "single"
    write_png(base / "photos" / "s1.png", (10, 120, 210))
    manifest = {
        "collection_id": "single",
        "title": "One moment",
        "photos": [{"photo_id": "s1", "source_path": "photos/s1.png", "timestamp": day_time(14)}],
        "locale": "en",
    }
    write_json(base / "manifest.json", manifest)
    annotations = {
        "descriptions": {"s1": "A single snapshot of a red balloon tied to a park bench."},
        "scenes": [
            {
                "photos": ["s1"],
                "activity": {
                    "sentence": "A pause at a park bench where a balloon was tied.",
                    "aspects": {"who": None, "what": "a pause on a walk", "when": None, "where": "a park bench"},
                    "reasons": ["The bench slats and gravel path frame the shot."],
                },
                "details": [
                    {"category": "others", "description": "A glossy red balloon bobbing on a short ribbon."}
                ],
                "summary": "A quiet pause at the park bench.",
            }
        ],
    }
    write_json(base / "manifest.annotations.json", annotations)


# ---------------------------------------------------------------------------
# Hand-authored memory trees (2, 3, and 5 scenes)


def _meta() -> BuildMetadata:
    return BuildMetadata(
        similarity_threshold=0.5,
        model_id="hand-authored",
        built_at=datetime(2000, 1, 1, tzinfo=timezone.utc),
    )


def _scene(scene_id: int, photo_ids: list[str], sentence: str, summary: str, details: list[tuple[str, str]]) -> Scene:
    return Scene(
        scene_id=scene_id,
        photo_ids=photo_ids,
        activity=SceneActivity(sentence=sentence, reasons=[f"Photo evidence supports scene {scene_id}."]),
        details=[
            SceneDetail(detail_id=f"s{scene_id}-d{k}", category=DetailCategory(cat), description=desc)
            for k, (cat, desc) in enumerate(details, start=1)
        ],
        summary_sentence=summary,
    )


def _tree(collection_id: str, scenes: list[Scene]) -> MemoryTree:
    return MemoryTree(
        collection_id=collection_id,
        storyline=[StorylineEntry(s.scene_id, s.summary_sentence) for s in scenes],
        scenes=scenes,
        build_metadata=_meta(),
    )


def make_trees() -> None:
    trees_dir = FIXTURES / "trees"
    park = _tree(
        "park-day",
        [
            _scene(
                1,
                ["k1", "k2"],
                "You fed ducks by the pond in the morning.",
                "First, feeding ducks by the pond.",
                [
                    ("animals", "A mallard drake circling for breadcrumbs."),
                    ("people", "A toddler in a puffy orange jacket pointing excitedly."),
                ],
            ),
            _scene(
                2,
                ["k3"],
                "You rested under the old oak at midday.",
                "Then, a rest under the old oak.",
                [("plants", "Thick gnarled oak roots wrapping around a picnic blanket.")],
            ),
        ],
    )
    save_tree(park, trees_dir / "two_scene.json")

    city = _tree(
        "city-weekend",
        [
            _scene(
                1,
                ["w1", "w2"],
                "You browsed the flea market stalls on Saturday morning.",
                "First, browsing the flea market.",
                [("others", "A crate of vinyl records priced with chalk numerals.")],
            ),
            _scene(
                2,
                ["w3"],
                "You rode the funicular up the hill at noon.",
                "Then, a funicular ride up the hill.",
                [
                    ("buildings", "The funicular carriage painted in cherry lacquer."),
                    ("texts", "A route map listing four stops in gothic lettering."),
                ],
            ),
            _scene(
                3,
                ["w4", "w5"],
                "You watched the sunset from the terrace cafe.",
                "Finally, sunset from the terrace cafe.",
                [("food", "Espresso cups beside a slice of walnut cake.")],
            ),
        ],
    )
    save_tree(city, trees_dir / "three_scene.json")

    tour = _tree(
        "grand-tour",
        [
            _scene(
                1,
                ["g1", "g2"],
                "You boarded the overnight train on Monday evening.",
                "First, boarding the overnight train.",
                [
                    ("texts", "A departures board flashing platform nine."),
                    ("people", "A conductor punching tickets with a silver clipper."),
                ],
            ),
            _scene(
                2,
                ["g3", "g4"],
                "You toured the harbor by ferry on Tuesday.",
                "Then, a ferry tour of the harbor.",
                [("buildings", "A lighthouse striped like a candy cane at the breakwater.")],
            ),
            _scene(
                3,
                ["g5"],
                "You climbed the bell tower before lunch.",
                "Next, the climb up the bell tower.",
                [
                    ("buildings", "A spiral staircase of worn limestone treads."),
                    ("others", "A cast bronze bell taller than a person."),
                    ("texts", "Graffiti initials carved into the parapet ledge."),
                ],
            ),
            _scene(
                4,
                ["g6", "g7"],
                "You wandered the botanical garden in the rain.",
                "After that, the botanical garden in the rain.",
                [],
            ),
            _scene(
                5,
                ["g8", "g9"],
                "You ended the trip with a seafood dinner at the quay.",
                "Finally, a seafood dinner at the quay.",
                [
                    ("food", "A platter of grilled octopus with charred lemon halves."),
                    ("people", "The chef waving through the open kitchen hatch."),
                ],
            ),
        ],
    )
    save_tree(tour, trees_dir / "five_scene.json")


def make_scripts() -> None:
    scripts_dir = FIXTURES / "scripts"
    write_json(scripts_dir / "compliant.json", {"persona": "compliant"})
    write_json(scripts_dir / "scene_hopper.json", {"persona": "scene_hopper"})
    write_json(
        scripts_dir / "mixed_steps.json",
        {"steps": ["Okay", "What was I wearing?", "Go on", "Next scene", "Okay", "Okay", "Okay", "Okay", "Okay"]},
    )


def main() -> None:
    make_trip()
    make_contrast()
    make_single()
    make_trees()
    make_scripts()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
