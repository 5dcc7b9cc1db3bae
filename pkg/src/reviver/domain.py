"""Core data model: photo collections, memory trees, chat turns, session state.

A memory tree organizes one event collection into three levels
(storyline - scene activity - scene detail). Trees are immutable after
build and shared across sessions; session state is mutated by exactly
one in-flight turn at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum


class DetailCategory(str, Enum):
    PEOPLE = "people"
    FOOD = "food"
    ANIMALS = "animals"
    PLANTS = "plants"
    BUILDINGS = "buildings"
    TEXTS = "texts"
    OTHERS = "others"


class GuidanceKind(str, Enum):
    STORYLINE = "storyline"
    ACTIVITY_INTRO = "activity_intro"
    DETAIL = "detail"
    SCENE_SUGGESTION = "scene_suggestion"
    FINAL_SUMMARY = "final_summary"
    NONE = "none"


class InputKind(str, Enum):
    ACCEPTANCE = "acceptance"
    REJECTION = "rejection"
    NEXT_SCENE_CMD = "next_scene_cmd"
    SWITCH_CMD = "switch_cmd"
    QUESTION = "question"
    STATEMENT = "statement"


class Phase(str, Enum):
    OPENED = "opened"
    EXPLORING = "exploring"
    CONCLUDED = "concluded"


ASPECT_KEYS = ("who", "what", "when", "where")


@dataclass
class PhotoRecord:
    photo_id: str
    source_path: str
    timestamp: datetime | None = None
    manifest_index: int = 0
    cached_description: str | None = None


@dataclass
class CollectionManifest:
    collection_id: str
    title: str
    photos: list[PhotoRecord]
    portrait_photo: str | None = None
    locale: str = "en"

    def photo_by_id(self, photo_id: str) -> PhotoRecord:
        for photo in self.photos:
            if photo.photo_id == photo_id:
                return photo
        raise KeyError(photo_id)

    def problems(self) -> list[str]:
        """Invariant violations as human-readable strings; empty means valid."""
        issues: list[str] = []
        if not self.photos:
            issues.append("manifest has no photos")
        ids = [p.photo_id for p in self.photos]
        for dup in sorted({i for i in ids if ids.count(i) > 1}):
            issues.append(f"duplicate photo_id {dup}")
        indices = sorted(p.manifest_index for p in self.photos)
        if indices != list(range(len(self.photos))):
            issues.append("manifest_index values are not dense 0..n-1")
        if self.portrait_photo is not None:
            if any(p.source_path == self.portrait_photo for p in self.photos):
                issues.append("portrait_photo is also a member of photos")
        return issues


def chronological_key(photo: PhotoRecord) -> tuple[bool, datetime, int]:
    """Sort key: timestamp when present, else after all timestamped photos;
    manifest order breaks ties (and orders the timestamp-less tail)."""
    missing = photo.timestamp is None
    ts = photo.timestamp if photo.timestamp is not None else datetime.min.replace(tzinfo=timezone.utc)
    return (missing, ts, photo.manifest_index)


@dataclass
class SceneActivity:
    sentence: str
    aspects: dict[str, str | None] = field(default_factory=lambda: {k: None for k in ASPECT_KEYS})
    reasons: list[str] = field(default_factory=list)
    char_budget: int = 100


@dataclass
class SceneDetail:
    detail_id: str
    category: DetailCategory
    description: str


@dataclass
class Scene:
    scene_id: int
    photo_ids: list[str]
    activity: SceneActivity
    details: list[SceneDetail]
    summary_sentence: str


@dataclass
class StorylineEntry:
    scene_id: int
    summary: str


@dataclass
class BuildMetadata:
    similarity_threshold: float
    model_id: str
    built_at: datetime


@dataclass
class MemoryTree:
    collection_id: str
    storyline: list[StorylineEntry]
    scenes: list[Scene]
    build_metadata: BuildMetadata

    def scene_by_id(self, scene_id: int) -> Scene:
        for scene in self.scenes:
            if scene.scene_id == scene_id:
                return scene
        raise KeyError(scene_id)

    @property
    def scene_ids(self) -> list[int]:
        return [s.scene_id for s in self.scenes]

    @property
    def photo_ids(self) -> list[str]:
        return [pid for s in self.scenes for pid in s.photo_ids]


@dataclass
class TurnAnnotations:
    selected_scene: int | None = None
    classified_as: InputKind | None = None
    guidance_kind: GuidanceKind | None = None
    emitted_detail_id: str | None = None
    selected_photo_ids: list[str] | None = None


@dataclass
class ChatTurn:
    turn_index: int
    speaker: str  # "user" | "bot"
    text: str
    annotations: TurnAnnotations = field(default_factory=TurnAnnotations)


@dataclass
class Transcript:
    collection_id: str
    engine: str
    turns: list[ChatTurn]
    seed: int | None = None

    def bot_turns(self) -> list[ChatTurn]:
        return [t for t in self.turns if t.speaker == "bot"]

    def user_turns(self) -> list[ChatTurn]:
        return [t for t in self.turns if t.speaker == "user"]


@dataclass
class SessionState:
    session_id: str
    collection_id: str
    engine: str = "reviver"
    current_scene: int = 1
    discussed_details: dict[int, set[str]] = field(default_factory=dict)
    visited_scenes: set[int] = field(default_factory=set)
    pending_suggestion: int | None = None
    phase: Phase = Phase.OPENED
    history: list[ChatTurn] = field(default_factory=list)

    def discussed_in(self, scene_id: int) -> set[str]:
        return self.discussed_details.setdefault(scene_id, set())

    def last_user_turn(self) -> ChatTurn | None:
        for turn in reversed(self.history):
            if turn.speaker == "user":
                return turn
        return None

    def next_turn_index(self) -> int:
        return len(self.history)

    def append_turn(self, turn: ChatTurn) -> None:
        self.history.append(turn)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class Violation:
    invariant: str
    offending_id: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, invariant: str, offending_id: str, message: str) -> None:
        self.violations.append(Violation(invariant, offending_id, message))

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"[{v.invariant}] {v.message}" for v in self.violations)


def validate_tree(tree: MemoryTree, manifest: CollectionManifest | None = None) -> ValidationReport:
    """Check every memory-tree invariant; violations are data, not failures.

    With a manifest the partition and contiguity checks run against the
    collection's chronological order; without one, only tree-internal
    invariants are checked.
    """
    report = ValidationReport()

    if not tree.scenes:
        report.add("non-empty", tree.collection_id, "tree has no scenes")
        return report

    n = len(tree.scenes)
    if tree.scene_ids != list(range(1, n + 1)):
        report.add("scene numbering", str(tree.scene_ids), f"scene_ids must be 1..{n} in order, got {tree.scene_ids}")

    storyline_ids = [e.scene_id for e in tree.storyline]
    if sorted(storyline_ids) == sorted(tree.scene_ids) and storyline_ids != tree.scene_ids:
        report.add(
            "chronological order",
            str(storyline_ids),
            f"storyline lists scenes {storyline_ids}, not in chronological order {tree.scene_ids}",
        )
    elif storyline_ids != tree.scene_ids:
        report.add(
            "storyline correspondence",
            str(storyline_ids),
            f"storyline entries {storyline_ids} are not 1:1 with scenes {tree.scene_ids}",
        )

    for entry in tree.storyline:
        try:
            scene = tree.scene_by_id(entry.scene_id)
        except KeyError:
            continue
        if scene.summary_sentence != entry.summary:
            report.add(
                "storyline correspondence",
                f"scene {entry.scene_id}",
                f"storyline summary for scene {entry.scene_id} differs from the scene's summary_sentence",
            )

    seen: dict[str, int] = {}
    for scene in tree.scenes:
        if not scene.photo_ids:
            report.add("non-empty", f"scene {scene.scene_id}", f"scene {scene.scene_id} has no photos")
        for pid in scene.photo_ids:
            if pid in seen:
                report.add("partition", pid, f"photo {pid} appears in scenes {seen[pid]} and {scene.scene_id}")
            seen[pid] = scene.scene_id

        if len(scene.activity.sentence) > scene.activity.char_budget:
            report.add(
                "activity length",
                f"scene {scene.scene_id}",
                f"activity sentence of scene {scene.scene_id} exceeds {scene.activity.char_budget} characters",
            )
        detail_ids = [d.detail_id for d in scene.details]
        for dup in sorted({d for d in detail_ids if detail_ids.count(d) > 1}):
            report.add("detail ids", dup, f"duplicate detail_id {dup} in scene {scene.scene_id}")

    if manifest is not None:
        chronological = [p.photo_id for p in sorted(manifest.photos, key=chronological_key)]
        manifest_ids = set(chronological)
        tree_ids = set(seen)
        for pid in [p for p in chronological if p not in tree_ids]:
            report.add("partition", pid, f"photo {pid} from the manifest is missing from every scene")
        for pid in sorted(tree_ids - manifest_ids):
            report.add("partition", pid, f"photo {pid} is not in the manifest")
        if not (tree_ids - manifest_ids) and not (manifest_ids - tree_ids):
            flattened = tree.photo_ids
            if flattened != chronological:
                report.add(
                    "contiguity",
                    tree.collection_id,
                    "scenes do not partition the chronological photo order into contiguous runs",
                )

    return report


def check_session_invariants(state: SessionState, tree: MemoryTree) -> list[str]:
    """Session-state invariants, checkable after every dialogue transition."""
    issues: list[str] = []
    ids = set(tree.scene_ids)
    if state.current_scene not in ids:
        issues.append(f"current_scene {state.current_scene} not in tree")
    if state.pending_suggestion is not None:
        if state.pending_suggestion in state.visited_scenes:
            issues.append(f"pending_suggestion {state.pending_suggestion} already visited")
        if state.pending_suggestion not in ids:
            issues.append(f"pending_suggestion {state.pending_suggestion} not in tree")
    for scene_id, discussed in state.discussed_details.items():
        if scene_id not in ids:
            issues.append(f"discussed_details references unknown scene {scene_id}")
            continue
        known = {d.detail_id for d in tree.scene_by_id(scene_id).details}
        for did in sorted(discussed - known):
            issues.append(f"discussed detail {did} not in scene {scene_id}")
    if not state.visited_scenes <= ids:
        issues.append("visited_scenes contains unknown scenes")
    if state.phase is Phase.CONCLUDED and state.visited_scenes != ids:
        issues.append("phase is concluded but not all scenes were visited")
    return issues
