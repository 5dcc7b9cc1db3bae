"""Scripted-user simulation and task metrics.

Personas stand in for study participants: `compliant` accepts every
suggestion, `curious` mixes in questions, `scene_hopper` jumps around
with commands, `silent_quitter` walks away early. Where a persona
branches it draws from a seeded RNG, so every metric table is
reproducible from (fixture, seed). Metrics: scene coverage under the
engine-specific "discussed" rule, the narrative word-count ratio, the
Jaccard agreement between segmentation cut sets, and accuracy
bookkeeping over hand-labeled tree statements.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .baseline import BaselineEngine
from .config import CJK_LOCALE_PREFIXES, DialogueConfig, EvalConfig
from .dialogue import ReviverEngine
from .domain import (
    CollectionManifest,
    MemoryTree,
    Phase,
    PhotoRecord,
    Transcript,
)
from .gateway import ModelGateway


class MetricsError(Exception):
    pass


# ---------------------------------------------------------------------------
# Metrics


def jaccard(a: set, b: set) -> float:
    """|a n b| / |a u b|; two empty sets agree perfectly (1.0)."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def word_count(text: str, locale: str = "en") -> int:
    """Whitespace tokens for space-delimited locales; per-character count
    (whitespace excluded) for CJK locales."""
    if locale.split("-")[0] in CJK_LOCALE_PREFIXES:
        return sum(1 for ch in text if not ch.isspace())
    return len(text.split())


def memory_ratio(pre_narrative: str, post_narrative: str, locale: str = "en") -> float:
    pre = word_count(pre_narrative, locale)
    if pre == 0:
        raise MetricsError("pre-trial narrative has zero words; ratio undefined")
    return word_count(post_narrative, locale) / pre


def _is_reply_turn(transcript: Transcript, index: int) -> bool:
    turn = transcript.turns[index]
    return turn.speaker == "bot" and index > 0 and transcript.turns[index - 1].speaker == "user"


def scene_coverage(transcript: Transcript, tree: MemoryTree, engine_kind: str) -> float:
    """Fraction of scenes discussed.

    Reviver counts a scene once it was selected for reply generation;
    the baseline counts a scene once any of its photos was selected,
    cumulatively across turns.
    """
    scene_ids = set(tree.scene_ids)
    if not scene_ids:
        raise MetricsError("tree has no scenes")
    discussed: set[int] = set()
    if engine_kind == "reviver":
        for index, turn in enumerate(transcript.turns):
            if not _is_reply_turn(transcript, index):
                continue
            a = turn.annotations
            if a.selected_scene is None and a.guidance_kind is None:
                raise MetricsError(f"bot turn {turn.turn_index} lacks engine annotations")
            if a.selected_scene is not None:
                discussed.add(a.selected_scene)
    elif engine_kind == "baseline":
        photo_to_scene = {pid: s.scene_id for s in tree.scenes for pid in s.photo_ids}
        for index, turn in enumerate(transcript.turns):
            if not _is_reply_turn(transcript, index):
                continue
            a = turn.annotations
            if a.selected_photo_ids is None:
                if a.guidance_kind is not None:
                    continue  # error turns carry no selection
                raise MetricsError(f"bot turn {turn.turn_index} lacks selection annotations")
            discussed.update(photo_to_scene[pid] for pid in a.selected_photo_ids if pid in photo_to_scene)
    else:
        raise ValueError(f"unknown engine kind {engine_kind!r}")
    return len(discussed & scene_ids) / len(scene_ids)


# ---------------------------------------------------------------------------
# Scripted users


@dataclass
class UserScript:
    """A fixed step list, or a named persona that generates inputs."""

    persona: str | None = None
    steps: list[str] | None = None
    max_turns: int = 200

    @classmethod
    def from_dict(cls, data: dict) -> "UserScript":
        return cls(
            persona=data.get("persona"),
            steps=list(data["steps"]) if data.get("steps") is not None else None,
            max_turns=int(data.get("max_turns", 200)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "UserScript":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _compliant_inputs(rng: random.Random) -> Iterator[str]:
    while True:
        yield "Okay"
        yield "Go on"


def _curious_inputs(rng: random.Random) -> Iterator[str]:
    while True:
        roll = rng.random()
        if roll < 0.3:
            yield rng.choice(["What else can you see there?", "Who was with me?", "What was the weather like?"])
        else:
            yield rng.choice(["Okay", "Go on", "That brings back memories."])


def _scene_hopper_inputs(rng: random.Random) -> Iterator[str]:
    while True:
        yield "Next scene" if rng.random() < 0.5 else "Okay"


def _silent_quitter_inputs(rng: random.Random) -> Iterator[str]:
    for _ in range(rng.randint(2, 5)):
        yield "Okay"


PERSONAS: dict[str, Callable[[random.Random], Iterator[str]]] = {
    "compliant": _compliant_inputs,
    "curious": _curious_inputs,
    "scene_hopper": _scene_hopper_inputs,
    "silent_quitter": _silent_quitter_inputs,
}


def script_inputs(script: UserScript, seed: int) -> Iterator[str]:
    if script.steps is not None:
        return iter(script.steps)
    if script.persona is None:
        raise ValueError("script needs either steps or a persona")
    try:
        persona = PERSONAS[script.persona]
    except KeyError:
        raise ValueError(f"unknown persona {script.persona!r}") from None
    return persona(random.Random(seed))


# ---------------------------------------------------------------------------
# Session runner


@dataclass
class MetricsBundle:
    engine: str
    scene_coverage: float | None
    concluded: bool
    truncated: bool
    user_turn_count: int
    bot_turn_count: int
    emitted_detail_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "scene_coverage": self.scene_coverage,
            "concluded": self.concluded,
            "truncated": self.truncated,
            "user_turn_count": self.user_turn_count,
            "bot_turn_count": self.bot_turn_count,
            "emitted_detail_ids": list(self.emitted_detail_ids),
        }


def run_scripted_session(
    engine_kind: str,
    script: UserScript,
    gateway: ModelGateway,
    tree: MemoryTree | None = None,
    manifest: CollectionManifest | None = None,
    seed: int = 0,
    config: DialogueConfig | None = None,
    eval_config: EvalConfig | None = None,
    session_id: str | None = None,
) -> tuple[Transcript, MetricsBundle]:
    """Drive one engine with one scripted user and collect the metrics.

    Reviver needs the tree (a stub manifest is synthesized if none is
    given); the baseline needs the manifest with descriptions prepared,
    and uses the tree only for the coverage metric.
    """
    cap = min(script.max_turns, (eval_config or EvalConfig()).max_turns)
    if engine_kind == "reviver":
        if tree is None:
            raise ValueError("reviver sessions need a tree")
        manifest = manifest or manifest_stub_for_tree(tree)
        engine: ReviverEngine | BaselineEngine = ReviverEngine(tree, manifest, gateway, config)
        collection_id = tree.collection_id
    elif engine_kind == "baseline":
        if manifest is None:
            raise ValueError("baseline sessions need a manifest")
        engine = BaselineEngine(manifest, gateway, config)
        collection_id = manifest.collection_id
    else:
        raise ValueError(f"unknown engine kind {engine_kind!r}")

    state, _ = engine.start_session(session_id or f"{engine_kind}-{seed}")
    inputs = script_inputs(script, seed)
    sent = 0
    truncated = False
    while True:
        if state.phase is Phase.CONCLUDED:
            break
        if sent >= cap:
            truncated = True
            break
        try:
            text = next(inputs)
        except StopIteration:
            break
        engine.reply(state, text)
        sent += 1

    transcript = Transcript(
        collection_id=collection_id,
        engine=engine_kind,
        turns=list(state.history),
        seed=seed,
    )
    coverage = scene_coverage(transcript, tree, engine_kind) if tree is not None else None
    emitted = [
        t.annotations.emitted_detail_id
        for t in transcript.bot_turns()
        if t.annotations.emitted_detail_id is not None
    ]
    metrics = MetricsBundle(
        engine=engine_kind,
        scene_coverage=coverage,
        concluded=state.phase is Phase.CONCLUDED,
        truncated=truncated,
        user_turn_count=len(transcript.user_turns()),
        bot_turn_count=len(transcript.bot_turns()),
        emitted_detail_ids=emitted,
    )
    return transcript, metrics


def manifest_stub_for_tree(tree: MemoryTree) -> CollectionManifest:
    """Minimal manifest whose photo order mirrors the tree; used when only
    a tree file is at hand (mock mode never reads the image bytes)."""
    photos = [
        PhotoRecord(photo_id=pid, source_path=pid, manifest_index=index)
        for index, pid in enumerate(tree.photo_ids)
    ]
    return CollectionManifest(collection_id=tree.collection_id, title=tree.collection_id, photos=photos)


# ---------------------------------------------------------------------------
# Accuracy annotation bookkeeping


@dataclass
class StatementLabel:
    status: str  # "correct" | "inaccurate"
    reason: str | None = None


@dataclass
class AnnotationSet:
    statement_labels: dict[str, StatementLabel] = field(default_factory=dict)
    segmentation_points: dict[str, set[int]] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationSet":
        labels = {}
        for key, value in (data.get("statement_labels") or {}).items():
            if isinstance(value, str):
                labels[key] = StatementLabel(status=value)
            else:
                labels[key] = StatementLabel(status=value["status"], reason=value.get("reason"))
        return cls(
            statement_labels=labels,
            segmentation_points={k: set(v) for k, v in (data.get("segmentation_points") or {}).items()},
        )

    @classmethod
    def load(cls, path: str | Path) -> "AnnotationSet":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class AccuracyReport:
    storyline_acc: float
    activity_acc: float
    detail_acc: float
    error_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "storyline_acc": self.storyline_acc,
            "activity_acc": self.activity_acc,
            "detail_acc": self.detail_acc,
            "error_counts": dict(self.error_counts),
        }


def tree_statement_ids(tree: MemoryTree) -> list[str]:
    ids = [f"storyline:{e.scene_id}" for e in tree.storyline]
    ids += [f"activity:{s.scene_id}" for s in tree.scenes]
    ids += [f"detail:{d.detail_id}" for s in tree.scenes for d in s.details]
    return ids


def score_annotations(tree: MemoryTree, annotations: AnnotationSet) -> AccuracyReport:
    """Correct statements / total statements, per tree level.

    Labels must cover exactly the tree's statements; anything uncovered
    (or unknown) is an error listing the offending ids.
    """
    expected = tree_statement_ids(tree)
    expected_set = set(expected)
    labeled = set(annotations.statement_labels)
    missing = sorted(expected_set - labeled)
    unknown = sorted(labeled - expected_set)
    if missing or unknown:
        parts = []
        if missing:
            parts.append("unlabeled statements: " + ", ".join(missing))
        if unknown:
            parts.append("labels for unknown statements: " + ", ".join(unknown))
        raise MetricsError("; ".join(parts))

    def accuracy(prefix: str) -> float:
        ids = [i for i in expected if i.startswith(prefix)]
        if not ids:
            return 1.0
        correct = sum(1 for i in ids if annotations.statement_labels[i].status == "correct")
        return correct / len(ids)

    reasons = Counter(
        label.reason or "unspecified"
        for label in annotations.statement_labels.values()
        if label.status == "inaccurate"
    )
    return AccuracyReport(
        storyline_acc=accuracy("storyline:"),
        activity_acc=accuracy("activity:"),
        detail_acc=accuracy("detail:"),
        error_counts=dict(reasons),
    )
