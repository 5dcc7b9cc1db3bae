"""Memory-tree construction: order photos, segment scenes, extract, summarize.

The pipeline is chronological ordering -> adjacent-pair similarity
scoring with a strict below-threshold cut rule -> per-scene activity and
detail extraction -> storyline generation. Pair scoring goes through a
small scorer interface so the model scorer can be swapped for e.g. an
embedding-distance scorer without touching the thresholding.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Protocol

from .domain import (
    BuildMetadata,
    CollectionManifest,
    MemoryTree,
    PhotoRecord,
    Scene,
    SceneDetail,
    StorylineEntry,
    chronological_key,
    validate_tree,
)
from .gateway import GatewayError, ModelGateway

DEFAULT_THRESHOLD = 0.5


class PairScorer(Protocol):
    def score(self, a: PhotoRecord, b: PhotoRecord) -> float: ...


class GatewayPairScorer:
    def __init__(self, gateway: ModelGateway):
        self.gateway = gateway

    def score(self, a: PhotoRecord, b: PhotoRecord) -> float:
        return self.gateway.score_similarity(a, b)


@dataclass
class SegmentationResult:
    """Cut after photo index i (0-based) means i and i+1 land in different scenes."""

    boundaries: set[int] = field(default_factory=set)
    pair_scores: list[float] = field(default_factory=list)

    def scene_slices(self, n_photos: int) -> list[tuple[int, int]]:
        """Half-open (start, end) index ranges, one per scene."""
        slices = []
        start = 0
        for cut in sorted(self.boundaries):
            slices.append((start, cut + 1))
            start = cut + 1
        slices.append((start, n_photos))
        return slices


class BuildError(Exception):
    """Tree construction aborted; names the failing step and scene/pair."""


def order_photos(manifest: CollectionManifest) -> list[PhotoRecord]:
    """Chronological order from capture timestamps; photos with no
    timestamp keep manifest order after all timestamped ones."""
    if not manifest.photos:
        raise ValueError("manifest has no photos")
    return sorted(manifest.photos, key=chronological_key)


def segment_scenes(
    ordered_photos: list[PhotoRecord],
    scorer: PairScorer,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> SegmentationResult:
    """Score each adjacent pair and cut strictly below the threshold.

    Scores equal to the threshold do not split. Pair scoring is
    independent, so it may fan out over `workers` threads; results are
    re-indexed before thresholding.
    """
    if not ordered_photos:
        raise ValueError("cannot segment an empty photo list")
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    pairs = list(zip(ordered_photos, ordered_photos[1:]))

    def score_pair(index: int) -> float:
        a, b = pairs[index]
        try:
            return scorer.score(a, b)
        except GatewayError as exc:
            raise BuildError(f"similarity scoring failed on pair ({a.photo_id}, {b.photo_id}): {exc}") from exc

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score_pair, range(len(pairs))))
    else:
        scores = [score_pair(i) for i in range(len(pairs))]

    boundaries = {i for i, s in enumerate(scores) if s < threshold}
    return SegmentationResult(boundaries=boundaries, pair_scores=scores)


def build_memory_tree(
    manifest: CollectionManifest,
    gateway: ModelGateway,
    portrait: str | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    scorer: PairScorer | None = None,
    workers: int = 1,
    built_at: datetime | None = None,
) -> MemoryTree:
    """Run the full construction pipeline and return a validated tree.

    Any gateway failure aborts the build with the step and scene named;
    nothing is persisted here, so a failed build leaves no partial tree.
    """
    problems = manifest.problems()
    if problems:
        raise BuildError("invalid manifest: " + "; ".join(problems))
    portrait = portrait or manifest.portrait_photo

    ordered = order_photos(manifest)
    segmentation = segment_scenes(ordered, scorer or GatewayPairScorer(gateway), threshold, workers=workers)

    scenes: list[Scene] = []
    scene_infos = []
    for scene_id, (start, end) in enumerate(segmentation.scene_slices(len(ordered)), start=1):
        photos = ordered[start:end]
        try:
            activity, details = gateway.extract_scene_info(photos, portrait)
        except GatewayError as exc:
            raise BuildError(f"scene extraction failed on scene {scene_id}: {exc}") from exc
        details = [
            SceneDetail(detail_id=f"s{scene_id}-d{k}", category=d.category, description=d.description)
            for k, d in enumerate(details, start=1)
        ]
        scene_infos.append((activity, details))
        scenes.append(
            Scene(
                scene_id=scene_id,
                photo_ids=[p.photo_id for p in photos],
                activity=activity,
                details=details,
                summary_sentence="",
            )
        )

    try:
        summaries = gateway.generate_storyline(scene_infos)
    except GatewayError as exc:
        raise BuildError(f"storyline generation failed: {exc}") from exc
    for scene, summary in zip(scenes, summaries):
        scene.summary_sentence = summary

    tree = MemoryTree(
        collection_id=manifest.collection_id,
        storyline=[StorylineEntry(scene_id=s.scene_id, summary=s.summary_sentence) for s in scenes],
        scenes=scenes,
        build_metadata=BuildMetadata(
            similarity_threshold=threshold,
            model_id=gateway.model_id,
            built_at=built_at or datetime.now(timezone.utc),
        ),
    )
    report = validate_tree(tree, manifest)
    if not report.ok:
        raise BuildError(f"built tree failed validation: {report}")
    return tree
