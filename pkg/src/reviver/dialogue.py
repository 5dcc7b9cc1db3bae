"""Proactive dialogue strategy: scene selection rules, guidance scheduling,
and the three-stage per-turn reply pipeline.

Every user turn flows through classify -> select scene -> raw model reply
-> proactive guidance, and the final text is the raw reply concatenated
with the guidance. The guidance scheduler introduces a scene's activity
on first entry, then doles out one undiscussed detail per round, suggests
the first unvisited scene once the current one is exhausted and the user
had no question in the last round, and concludes with a final summary
when everything has been covered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .config import DialogueConfig
from .domain import (
    ChatTurn,
    CollectionManifest,
    GuidanceKind,
    InputKind,
    MemoryTree,
    Phase,
    PhotoRecord,
    Scene,
    SceneDetail,
    SessionState,
    TurnAnnotations,
    validate_tree,
)
from .gateway import GatewayError, ModelGateway

APOLOGY_TEXT = "Sorry, something went wrong while I was preparing a reply. Please say that again."

_STOPWORDS = frozenset(
    "a an the of in on at to with by for and or is are was were it its this that these those "
    "there here be been being as from i you we they he she my your our their me us them".split()
)


@dataclass
class InputClass:
    kind: InputKind
    keyword: str | None = None  # switch_cmd only


@dataclass
class Guidance:
    kind: GuidanceKind
    text: str = ""
    emitted_detail_id: str | None = None
    suggested_scene: int | None = None


class SessionRefused(Exception):
    """Session start refused; carries the tree validation report."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"tree failed validation: {report}")


class SessionConcluded(Exception):
    pass


# ---------------------------------------------------------------------------
# Token utilities (mention checks and keyword matching)


@lru_cache(maxsize=8192)
def _tokens(text: str) -> frozenset[str]:
    words = re.findall(r"[\w']+", text.casefold())
    return frozenset(w for w in words if w not in _STOPWORDS)


def _overlap_ratio(needle: str, haystack: str) -> float:
    """Fraction of the needle's content tokens present in the haystack."""
    needle_tokens = _tokens(needle)
    if not needle_tokens:
        return 0.0
    return len(needle_tokens & _tokens(haystack)) / len(needle_tokens)


def _contains_phrase(folded_text: str, phrase: str) -> bool:
    return re.search(rf"(?<!\w){re.escape(phrase)}(?!\w)", folded_text) is not None


# ---------------------------------------------------------------------------
# Input classification


def classify_input(
    text: str,
    locale: str = "en",
    config: DialogueConfig | None = None,
    suggestion_pending: bool = False,
) -> InputClass:
    """Deterministic rule-based classifier.

    Precedence: switch command > next-scene command > acceptance/rejection
    (only meaningful while a scene suggestion is pending) > question >
    statement. A question ends with a question mark or starts with an
    interrogative word for the locale.
    """
    cfg = config or DialogueConfig()
    folded = text.casefold().strip()

    for prefix in cfg.switch_prefixes:
        index = folded.find(prefix)
        if index != -1:
            keyword = text[index + len(prefix) :].strip().strip(".!?？。,;: ")
            if keyword:
                return InputClass(InputKind.SWITCH_CMD, keyword=keyword)

    if any(_contains_phrase(folded, phrase) for phrase in cfg.next_scene_phrases):
        return InputClass(InputKind.NEXT_SCENE_CMD)

    if suggestion_pending:
        if any(_contains_phrase(folded, kw) for kw in cfg.acceptance_keywords):
            return InputClass(InputKind.ACCEPTANCE)
        if any(_contains_phrase(folded, kw) for kw in cfg.rejection_keywords):
            return InputClass(InputKind.REJECTION)

    if folded.endswith(tuple(cfg.question_marks)):
        return InputClass(InputKind.QUESTION)
    first_word = folded.split()[0] if folded.split() else ""
    if first_word in cfg.question_words_for(locale):
        return InputClass(InputKind.QUESTION)

    return InputClass(InputKind.STATEMENT)


# ---------------------------------------------------------------------------
# Scene selection (stage 1)


def match_scene_by_keyword(tree: MemoryTree, keyword: str) -> int | None:
    """Scene whose activity + details + summary text best overlaps the
    keyword (case-folded content tokens); ties break to the earliest
    scene; no overlap at all means no match."""
    keyword_tokens = _tokens(keyword)
    if not keyword_tokens:
        return None
    best_scene: int | None = None
    best_overlap = 0
    for scene in tree.scenes:
        haystack = " ".join(
            [scene.activity.sentence]
            + [v for v in scene.activity.aspects.values() if v]
            + scene.activity.reasons
            + [d.description for d in scene.details]
            + [scene.summary_sentence]
        )
        overlap = len(keyword_tokens & _tokens(haystack))
        if overlap > best_overlap:
            best_scene, best_overlap = scene.scene_id, overlap
    return best_scene


def select_scene(state: SessionState, input_class: InputClass, tree: MemoryTree) -> int:
    """Stage-1 scene selection rules, in order:

    (a) a pending suggestion plus an acceptance moves to the suggested scene;
    (b) a next-scene command advances by one, clamped to the last scene;
    (c) a switch command moves to the best keyword match, staying put on a miss;
    (d) anything else leaves the scene unchanged.
    """
    if input_class.kind is InputKind.ACCEPTANCE and state.pending_suggestion is not None:
        return state.pending_suggestion
    if input_class.kind is InputKind.NEXT_SCENE_CMD:
        return min(state.current_scene + 1, tree.scene_ids[-1])
    if input_class.kind is InputKind.SWITCH_CMD and input_class.keyword:
        matched = match_scene_by_keyword(tree, input_class.keyword)
        return matched if matched is not None else state.current_scene
    return state.current_scene


# ---------------------------------------------------------------------------
# Guidance scheduling (stage 3)


def next_undiscussed_detail(
    state: SessionState, scene: Scene, config: DialogueConfig | None = None
) -> SceneDetail | None:
    """First detail in scene order that was neither emitted as guidance nor
    already mentioned (by token overlap) within any single prior turn."""
    cfg = config or DialogueConfig()
    discussed = state.discussed_details.get(scene.scene_id, set())
    for detail in scene.details:
        if detail.detail_id in discussed:
            continue
        if any(
            _overlap_ratio(detail.description, turn.text) >= cfg.mention_overlap_threshold
            for turn in state.history
        ):
            continue
        return detail
    return None


def next_scene_suggestion(state: SessionState, tree: MemoryTree) -> int | None:
    """Storyline scan order: the smallest scene id not yet visited."""
    for scene_id in tree.scene_ids:
        if scene_id not in state.visited_scenes:
            return scene_id
    return None


def should_suggest_new_scene(state: SessionState, tree: MemoryTree, config: DialogueConfig | None = None) -> bool:
    """True when the current scene is exhausted, the user asked no question
    in the last round, and an unvisited scene remains."""
    scene = tree.scene_by_id(state.current_scene)
    if next_undiscussed_detail(state, scene, config) is not None:
        return False
    last_user = state.last_user_turn()
    if last_user is not None and last_user.annotations.classified_as is InputKind.QUESTION:
        return False
    return next_scene_suggestion(state, tree) is not None


def _activity_intro_text(scene: Scene) -> str:
    parts = [f"Scene {scene.scene_id}: {scene.activity.sentence}"]
    parts.extend(scene.activity.reasons)
    return " ".join(p.strip() for p in parts if p.strip())


def _detail_text(detail: SceneDetail) -> str:
    return f"Here is something more from this scene: {detail.description}"


def _suggestion_text(tree: MemoryTree, current: Scene, discussed_count: int, target_id: int) -> str:
    target = tree.scene_by_id(target_id)
    return (
        f"We have talked about all the key contents in the current scene: "
        f"{current.summary_sentence} ({discussed_count} details discussed). "
        f"Do you want to proceed to the next scene? That would be scene {target.scene_id}: {target.summary_sentence}"
    )


def _final_summary_text(tree: MemoryTree) -> str:
    lines = [f"{entry.scene_id}. {entry.summary}" for entry in tree.storyline]
    return (
        "We have now explored every scene of this collection. Here is the whole story once more:\n"
        + "\n".join(lines)
        + "\nThank you for reminiscing with me."
    )


def _all_covered(state: SessionState, tree: MemoryTree, config: DialogueConfig | None) -> bool:
    if state.visited_scenes != set(tree.scene_ids):
        return False
    return all(next_undiscussed_detail(state, scene, config) is None for scene in tree.scenes)


def compose_guidance(
    state: SessionState,
    tree: MemoryTree,
    scene_id: int,
    config: DialogueConfig | None = None,
    raw_reply: str = "",
) -> Guidance:
    """Pick and apply this round's proactive guidance for the selected scene.

    Priority: first entry introduces the activity; then one undiscussed
    detail per round (skipping, but still consuming, any detail the raw
    reply already covered); then a new-scene suggestion; then, with every
    scene visited and exhausted, the concluding summary. Mutates the
    session's visited/discussed/pending bookkeeping accordingly.
    """
    cfg = config or DialogueConfig()
    scene = tree.scene_by_id(scene_id)

    if scene_id not in state.visited_scenes:
        state.visited_scenes.add(scene_id)
        return Guidance(GuidanceKind.ACTIVITY_INTRO, _activity_intro_text(scene))

    while True:
        detail = next_undiscussed_detail(state, scene, cfg)
        if detail is None:
            break
        state.discussed_in(scene_id).add(detail.detail_id)
        if raw_reply and _overlap_ratio(detail.description, raw_reply) >= cfg.mention_overlap_threshold:
            continue  # the raw reply already covered it; move to the next detail
        return Guidance(GuidanceKind.DETAIL, _detail_text(detail), emitted_detail_id=detail.detail_id)

    last_user = state.last_user_turn()
    rejected = last_user is not None and last_user.annotations.classified_as is InputKind.REJECTION
    if not rejected and should_suggest_new_scene(state, tree, cfg):
        target = next_scene_suggestion(state, tree)
        assert target is not None
        state.pending_suggestion = target
        discussed_count = len(state.discussed_details.get(scene_id, set()))
        return Guidance(
            GuidanceKind.SCENE_SUGGESTION,
            _suggestion_text(tree, scene, discussed_count, target),
            suggested_scene=target,
        )

    if _all_covered(state, tree, cfg):
        state.phase = Phase.CONCLUDED
        return Guidance(GuidanceKind.FINAL_SUMMARY, _final_summary_text(tree))

    return Guidance(GuidanceKind.NONE, "")


# ---------------------------------------------------------------------------
# Engine


def _opening_text(tree: MemoryTree) -> str:
    lines = [f"{entry.scene_id}. {entry.summary}" for entry in tree.storyline]
    first = tree.scenes[0]
    return (
        "Here is the storyline of your photo collection:\n"
        + "\n".join(lines)
        + f"\n\nShall we start with scene {first.scene_id}: {first.summary_sentence}"
    )


class ReviverEngine:
    """Binds one memory tree (immutable, shareable) to the dialogue rules.

    The engine itself is stateless across sessions; callers own the
    SessionState and must serialize turns per session.
    """

    def __init__(
        self,
        tree: MemoryTree,
        manifest: CollectionManifest,
        gateway: ModelGateway,
        config: DialogueConfig | None = None,
    ):
        self.tree = tree
        self.manifest = manifest
        self.gateway = gateway
        self.config = config or DialogueConfig()
        self._photos_by_id = {p.photo_id: p for p in manifest.photos}

    def scene_photos(self, scene_id: int) -> list[PhotoRecord]:
        scene = self.tree.scene_by_id(scene_id)
        return [self._photos_by_id[pid] for pid in scene.photo_ids if pid in self._photos_by_id]

    def start_session(self, session_id: str = "session") -> tuple[SessionState, ChatTurn]:
        """Open with the full storyline and a suggestion of the first scene."""
        report = validate_tree(self.tree)
        if not report.ok:
            raise SessionRefused(report)
        state = SessionState(
            session_id=session_id,
            collection_id=self.tree.collection_id,
            engine="reviver",
            current_scene=self.tree.scene_ids[0],
            pending_suggestion=self.tree.scene_ids[0],
            phase=Phase.OPENED,
        )
        turn = ChatTurn(
            turn_index=0,
            speaker="bot",
            text=_opening_text(self.tree),
            annotations=TurnAnnotations(guidance_kind=GuidanceKind.STORYLINE),
        )
        state.append_turn(turn)
        return state, turn

    def reply(self, state: SessionState, user_text: str) -> ChatTurn:
        """Run one full round; mutates `state` and returns the bot turn.

        On a gateway failure the bot apologizes and only the history
        changes, so the same input can simply be sent again.
        """
        if state.phase is Phase.CONCLUDED:
            raise SessionConcluded(f"session {state.session_id} has concluded")
        cfg = self.config
        input_class = classify_input(
            user_text,
            locale=self.manifest.locale,
            config=cfg,
            suggestion_pending=state.pending_suggestion is not None,
        )
        state.append_turn(
            ChatTurn(
                turn_index=state.next_turn_index(),
                speaker="user",
                text=user_text,
                annotations=TurnAnnotations(classified_as=input_class.kind),
            )
        )

        previous_scene = state.current_scene
        scene_id = select_scene(state, input_class, self.tree)

        try:
            raw_reply = self.gateway.generate_raw_reply(user_text, state.history[:-1], self.scene_photos(scene_id))
        except GatewayError:
            error_turn = ChatTurn(
                turn_index=state.next_turn_index(),
                speaker="bot",
                text=APOLOGY_TEXT,
                annotations=TurnAnnotations(guidance_kind=GuidanceKind.NONE),
            )
            state.append_turn(error_turn)
            return error_turn

        state.pending_suggestion = None
        state.current_scene = scene_id
        if state.phase is Phase.OPENED:
            state.phase = Phase.EXPLORING

        notes: list[str] = []
        if input_class.kind is InputKind.NEXT_SCENE_CMD and previous_scene == self.tree.scene_ids[-1]:
            notes.append("We are already at the last scene, so let's stay here.")
        if input_class.kind is InputKind.SWITCH_CMD and input_class.keyword:
            if match_scene_by_keyword(self.tree, input_class.keyword) is None:
                notes.append(f'I could not find a scene matching "{input_class.keyword}", so let\'s stay here.')

        guidance = compose_guidance(state, self.tree, scene_id, cfg, raw_reply=raw_reply)

        parts = [raw_reply] + notes
        if guidance.kind is not GuidanceKind.NONE:
            parts.append(guidance.text)
        text = cfg.guidance_separator.join(p for p in parts if p)

        bot_turn = ChatTurn(
            turn_index=state.next_turn_index(),
            speaker="bot",
            text=text,
            annotations=TurnAnnotations(
                selected_scene=scene_id,
                guidance_kind=guidance.kind,
                emitted_detail_id=guidance.emitted_detail_id,
            ),
        )
        state.append_turn(bot_turn)
        return bot_turn
