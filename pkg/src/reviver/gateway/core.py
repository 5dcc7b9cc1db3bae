"""The single abstraction over the large multimodal model.

All five prompt tasks go through `ModelGateway`, which owns prompt
construction, response parsing, the retry policy (two transport retries
with exponential backoff, one re-prompt on structured-parse failure),
the description cache, and per-backend concurrency capping. Swap the
backend to move between live and mock modes; the parsing and retry code
is shared.
"""

from __future__ import annotations

import logging
import threading
import time

from ..config import GatewayConfig
from ..domain import ASPECT_KEYS, ChatTurn, DetailCategory, PhotoRecord, SceneActivity, SceneDetail
from . import prompts
from .backends import Backend
from .parsing import StructuredParseError, clamp01, extract_json_block, parse_similarity, truncate_at_sentence
from .types import BackendTransportError, GatewayError, ModelParams, ModelRequest, ModelResponse, ModelTask

logger = logging.getLogger(__name__)


def _readable(path: str) -> bool:
    try:
        with open(path, "rb"):
            return True
    except OSError:
        return False


class ModelGateway:
    """Safe for concurrent calls; the mock backend has no shared mutable state."""

    def __init__(self, backend: Backend, config: GatewayConfig | None = None):
        self.backend = backend
        self.config = config or GatewayConfig()
        self._cap = threading.Semaphore(max(1, self.config.max_concurrent))

    @property
    def model_id(self) -> str:
        return self.backend.model_id

    # -- transport ----------------------------------------------------------

    def _call(self, task: ModelTask, prompt: str, image_refs: list[str], meta: dict) -> ModelResponse:
        if task is ModelTask.SCORE_SIMILARITY and len(image_refs) != 2:
            raise ValueError(f"score_similarity takes exactly 2 images, got {len(image_refs)}")
        request = ModelRequest(
            task=task,
            prompt_text=prompt,
            image_refs=list(image_refs),
            params=ModelParams(temperature=self.config.temperature, max_output_chars=self.config.max_output_chars),
        )
        attempts = self.config.transport_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                with self._cap:
                    return self.backend.complete(request, meta)
            except BackendTransportError as exc:
                last_error = exc
                if attempt + 1 < attempts:
                    time.sleep(self.config.backoff_base_s * (2**attempt))
        raise GatewayError(task, f"backend failed after {attempts} attempts: {last_error}")

    # -- describe_photo -----------------------------------------------------

    def describe_photo(self, photo: PhotoRecord, locale: str = "en") -> str:
        """One-paragraph description, cached on the record (one backend call)."""
        if photo.cached_description:
            return photo.cached_description
        if not _readable(photo.source_path):
            raise GatewayError(ModelTask.DESCRIBE_PHOTO, f"image unreadable: {photo.source_path}")
        response = self._call(
            ModelTask.DESCRIBE_PHOTO,
            prompts.describe_photo(locale),
            [photo.source_path],
            {"photo_id": photo.photo_id, "source_path": photo.source_path},
        )
        text = " ".join(response.text.split())
        if not text:
            raise GatewayError(ModelTask.DESCRIBE_PHOTO, f"empty description for {photo.photo_id}")
        photo.cached_description = text
        return text

    # -- score_similarity ---------------------------------------------------

    def score_similarity(self, a: PhotoRecord, b: PhotoRecord) -> float:
        """Activity similarity of two adjacent photos on a 0-to-1 scale."""
        for photo in (a, b):
            if not _readable(photo.source_path):
                raise GatewayError(ModelTask.SCORE_SIMILARITY, f"image unreadable: {photo.source_path}")
        meta = {"pair": (a.photo_id, b.photo_id), "paths": (a.source_path, b.source_path)}
        prompt = prompts.score_similarity()
        response = self._call(ModelTask.SCORE_SIMILARITY, prompt, [a.source_path, b.source_path], meta)
        for attempt in range(self.config.parse_reprompts + 1):
            try:
                return clamp01(parse_similarity(response.text))
            except StructuredParseError as exc:
                if attempt < self.config.parse_reprompts:
                    response = self._call(
                        ModelTask.SCORE_SIMILARITY,
                        prompt + "\nReply with a single number between 0 and 1, nothing else.",
                        [a.source_path, b.source_path],
                        meta,
                    )
                else:
                    raise GatewayError(
                        ModelTask.SCORE_SIMILARITY,
                        f"unparseable score for pair ({a.photo_id}, {b.photo_id}): {exc}",
                    ) from exc
        raise AssertionError("unreachable")

    # -- extract_scene_info -------------------------------------------------

    def extract_scene_info(
        self, photos: list[PhotoRecord], portrait: str | None = None
    ) -> tuple[SceneActivity, list[SceneDetail]]:
        """Activity (4W aspects with evidence reasons) and categorized details
        for one scene; all scene photos go in together, plus the optional
        portrait for owner recognition. Detail ids are provisional (d1..dk);
        the tree builder assigns scene-qualified ids."""
        if not photos:
            raise ValueError("extract_scene_info needs at least one photo")
        image_refs = [p.source_path for p in photos] + ([portrait] if portrait else [])
        meta = {"photo_ids": [p.photo_id for p in photos]}
        prompt = prompts.extract_scene(len(photos), portrait is not None)
        payload = self._structured(ModelTask.EXTRACT_SCENE, prompt, image_refs, meta)
        activity = self._parse_activity(payload)
        if len(activity.sentence) > activity.char_budget:
            # One re-prompt for a shorter sentence, then truncate at a sentence boundary.
            retry = self._structured(
                ModelTask.EXTRACT_SCENE,
                prompt + "\n" + prompts.shorter_activity_reprompt(activity.char_budget),
                image_refs,
                meta,
            )
            activity = self._parse_activity(retry)
            if len(activity.sentence) > activity.char_budget:
                activity.sentence = truncate_at_sentence(activity.sentence, activity.char_budget)
        details = []
        for ordinal, entry in enumerate(payload.get("details") or [], start=1):
            try:
                category = DetailCategory(str(entry.get("category", "others")).lower())
            except ValueError:
                category = DetailCategory.OTHERS
            details.append(
                SceneDetail(detail_id=f"d{ordinal}", category=category, description=str(entry.get("description", "")))
            )
        return activity, details

    def _parse_activity(self, payload: dict) -> SceneActivity:
        raw = payload.get("activity") or {}
        aspects_in = raw.get("aspects") or {}
        return SceneActivity(
            sentence=str(raw.get("sentence", "")).strip(),
            aspects={k: aspects_in.get(k) for k in ASPECT_KEYS},
            reasons=[str(r) for r in raw.get("reasons") or []],
        )

    def _structured(self, task: ModelTask, prompt: str, image_refs: list[str], meta: dict) -> dict | list:
        response = self._call(task, prompt, image_refs, meta)
        for attempt in range(self.config.parse_reprompts + 1):
            try:
                return extract_json_block(response.text)
            except StructuredParseError as exc:
                if attempt < self.config.parse_reprompts:
                    response = self._call(
                        task, prompt + "\nAnswer with the fenced JSON block only.", image_refs, meta
                    )
                else:
                    raise GatewayError(task, f"structured parse failed: {exc}") from exc
        raise AssertionError("unreachable")

    # -- generate_storyline --------------------------------------------------

    def generate_storyline(self, scene_infos: list[tuple[SceneActivity, list[SceneDetail]]]) -> list[str]:
        """One summary sentence per scene, order preserved."""
        if not scene_infos:
            raise ValueError("generate_storyline needs at least one scene")
        meta = {"scene_count": len(scene_infos), "scene_sentences": [a.sentence for a, _ in scene_infos]}
        prompt = prompts.generate_storyline(scene_infos)
        payload = self._structured(ModelTask.GEN_STORYLINE, prompt, [], meta)
        if self._storyline_ok(payload, len(scene_infos)):
            return [str(s) for s in payload]
        retry = self._structured(
            ModelTask.GEN_STORYLINE,
            prompt + "\n" + prompts.storyline_count_reprompt(len(scene_infos)),
            [],
            meta,
        )
        if self._storyline_ok(retry, len(scene_infos)):
            return [str(s) for s in retry]
        raise GatewayError(
            ModelTask.GEN_STORYLINE,
            f"expected {len(scene_infos)} summaries, got {len(retry) if isinstance(retry, list) else 'non-list'}",
        )

    @staticmethod
    def _storyline_ok(payload: object, expected: int) -> bool:
        return isinstance(payload, list) and len(payload) == expected

    # -- generate_raw_reply ---------------------------------------------------

    def generate_raw_reply(
        self,
        user_input: str,
        history: list[ChatTurn],
        scene_photos: list[PhotoRecord],
        portrait: str | None = None,
    ) -> str:
        """Free-form answer grounded in the chat history and the scene's raw
        photos; the optional portrait rides along for owner recognition."""
        if not scene_photos:
            raise ValueError("generate_raw_reply needs scene photos")
        meta = {
            "user_input": user_input,
            "turn_index": len(history),
            "photo_ids": [p.photo_id for p in scene_photos],
        }
        image_refs = [p.source_path for p in scene_photos] + ([portrait] if portrait else [])
        response = self._call(ModelTask.GEN_REPLY, prompts.generate_reply(user_input, history), image_refs, meta)
        return response.text.strip()

    # -- select_photos ---------------------------------------------------------

    def select_photos(
        self,
        user_input: str,
        descriptions: list[tuple[str, str]],
        history: list[ChatTurn] | None = None,
    ) -> list[str]:
        """Up to five distinct photo ids from the input, most relevant first.

        Model output is filtered to known ids; if nothing survives, falls
        back to the first five in manifest order.
        """
        if not descriptions:
            raise ValueError("select_photos needs photo descriptions")
        candidate_ids = [photo_id for photo_id, _ in descriptions]
        if len(candidate_ids) <= 5:
            return list(candidate_ids)
        meta = {"user_input": user_input, "candidate_ids": candidate_ids}
        payload = self._structured(
            ModelTask.SELECT_PHOTOS, prompts.select_photos(user_input, descriptions, history or []), [], meta
        )
        raw_ids = [str(x) for x in payload] if isinstance(payload, list) else []
        known = set(candidate_ids)
        selected: list[str] = []
        for photo_id in raw_ids:
            if photo_id in known and photo_id not in selected:
                selected.append(photo_id)
        dropped = [x for x in raw_ids if x not in known]
        if dropped:
            logger.warning("select_photos dropped unknown ids: %s", dropped)
        if not selected:
            logger.warning("select_photos got no usable ids; falling back to manifest order")
            selected = candidate_ids[:5]
        return selected[:5]
