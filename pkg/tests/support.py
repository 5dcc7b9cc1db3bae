"""Shared test helpers: counting/flaky backends and a random-tree generator.

Random trees give every detail a private vocabulary (hex markers) so the
dialogue engine's token-overlap mention check can never fire by accident;
what remains is purely the state-machine behaviour under test.
"""

from __future__ import annotations

import random

from reviver.config import GatewayConfig
from reviver.domain import (
    BuildMetadata,
    CollectionManifest,
    DetailCategory,
    MemoryTree,
    PhotoRecord,
    Scene,
    SceneActivity,
    SceneDetail,
    StorylineEntry,
)
from reviver.gateway import Backend, FixtureAnnotations, MockBackend, ModelGateway, ModelRequest, ModelResponse
from reviver.gateway.types import BackendTransportError

from datetime import datetime, timezone

FIXED_INSTANT = datetime(2000, 1, 1, tzinfo=timezone.utc)

CATEGORIES = list(DetailCategory)


class CountingBackend:
    """Delegates to another backend and counts calls per task."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.calls: list[str] = []

    @property
    def model_id(self) -> str:
        return self.inner.model_id

    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse:
        self.calls.append(request.task.value)
        return self.inner.complete(request, meta)

    def count(self, task: str | None = None) -> int:
        if task is None:
            return len(self.calls)
        return sum(1 for t in self.calls if t == task)


class FlakyBackend:
    """Fails the first `fail_first` calls with a transport error, then delegates."""

    def __init__(self, inner: Backend, fail_first: int):
        self.inner = inner
        self.remaining_failures = fail_first

    @property
    def model_id(self) -> str:
        return self.inner.model_id

    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse:
        if self.remaining_failures > 0:
            self.remaining_failures -= 1
            raise BackendTransportError("flaky test backend")
        return self.inner.complete(request, meta)


class StaticBackend:
    """Always answers with the same text; for parser-path tests."""

    def __init__(self, text: str):
        self.text = text

    @property
    def model_id(self) -> str:
        return "static"

    def complete(self, request: ModelRequest, meta: dict) -> ModelResponse:
        return ModelResponse(text=self.text)


def fast_gateway_config(**overrides) -> GatewayConfig:
    """No backoff sleeping inside tests."""
    return GatewayConfig(backoff_base_s=0.0, **overrides)


def mock_gateway(annotations: FixtureAnnotations | None = None, backend: Backend | None = None) -> ModelGateway:
    return ModelGateway(backend or MockBackend(annotations), fast_gateway_config())


def random_tree(
    rng: random.Random,
    collection_id: str | None = None,
    n_scenes: int | None = None,
) -> tuple[MemoryTree, CollectionManifest]:
    """A structurally valid random tree plus a matching stub manifest."""

    def marker() -> str:
        return f"x{rng.randrange(16**8):08x}"

    n_scenes = n_scenes if n_scenes is not None else rng.randint(1, 6)
    collection_id = collection_id or f"rand-{marker()}"
    scenes = []
    photos: list[PhotoRecord] = []
    for scene_id in range(1, n_scenes + 1):
        photo_ids = []
        for _ in range(rng.randint(1, 4)):
            pid = f"ph{len(photos)}"
            photos.append(PhotoRecord(photo_id=pid, source_path=pid, manifest_index=len(photos)))
            photo_ids.append(pid)
        details = [
            SceneDetail(
                detail_id=f"s{scene_id}-d{k}",
                category=rng.choice(CATEGORIES),
                description=f"object {marker()} beside {marker()}",
            )
            for k in range(1, rng.randint(0, 5) + 1)
        ]
        scenes.append(
            Scene(
                scene_id=scene_id,
                photo_ids=photo_ids,
                activity=SceneActivity(
                    sentence=f"Happening {marker()} during moment {scene_id}.",
                    reasons=[f"Clue {marker()} points there."],
                ),
                details=details,
                summary_sentence=f"Part {scene_id} recalls {marker()}.",
            )
        )
    tree = MemoryTree(
        collection_id=collection_id,
        storyline=[StorylineEntry(s.scene_id, s.summary_sentence) for s in scenes],
        scenes=scenes,
        build_metadata=BuildMetadata(similarity_threshold=0.5, model_id="mock", built_at=FIXED_INSTANT),
    )
    manifest = CollectionManifest(collection_id=collection_id, title=collection_id, photos=photos)
    return tree, manifest


def turn_bound(tree: MemoryTree) -> int:
    """Bot-turn budget for a fully compliant session: opening, then per
    scene an intro + one turn per detail + a transition, plus the final."""
    return 1 + sum(2 + len(s.details) for s in tree.scenes) + 1
