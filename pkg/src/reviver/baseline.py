"""The naive chatbot: per-turn relevance selection over pre-generated photo
descriptions, then a reply from the five selected photos' raw images.

No memory tree, no guidance, no scene bookkeeping: its deficiencies are
the point of comparison. The engine refuses to chat until every photo
has a cached description.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import DialogueConfig
from .domain import ChatTurn, CollectionManifest, GuidanceKind, Phase, SessionState, TurnAnnotations
from .gateway import GatewayError, ModelGateway

OPENING_TEXT = "Hello! Ask me anything about this photo collection."


@dataclass
class DescriptionReport:
    described: list[str] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.failures


class DescriptionsNotReady(Exception):
    def __init__(self, missing: list[str]):
        self.missing = missing
        super().__init__(f"photos without descriptions: {', '.join(missing)}")


def prepare_descriptions(manifest: CollectionManifest, gateway: ModelGateway) -> DescriptionReport:
    """Fill cached_description for every photo; reruns are free (cache).

    Per-photo failures are recorded and the pass continues, but any
    missing description blocks chat start.
    """
    report = DescriptionReport()
    for photo in manifest.photos:
        try:
            gateway.describe_photo(photo, manifest.locale)
            report.described.append(photo.photo_id)
        except GatewayError as exc:
            report.failures[photo.photo_id] = str(exc)
    return report


class BaselineEngine:
    """Two steps per turn: select five photos by their text descriptions,
    then answer from the selected photos' raw images (plus the portrait)."""

    def __init__(self, manifest: CollectionManifest, gateway: ModelGateway, config: DialogueConfig | None = None):
        self.manifest = manifest
        self.gateway = gateway
        self.config = config or DialogueConfig()

    def _require_descriptions(self) -> None:
        missing = [p.photo_id for p in self.manifest.photos if not p.cached_description]
        if missing:
            raise DescriptionsNotReady(missing)

    def start_session(self, session_id: str = "session") -> tuple[SessionState, ChatTurn]:
        self._require_descriptions()
        state = SessionState(
            session_id=session_id,
            collection_id=self.manifest.collection_id,
            engine="baseline",
            phase=Phase.EXPLORING,
        )
        turn = ChatTurn(turn_index=0, speaker="bot", text=OPENING_TEXT)
        state.append_turn(turn)
        return state, turn

    def reply(self, state: SessionState, user_text: str) -> ChatTurn:
        """One round; the bot turn carries the selected photo ids."""
        self._require_descriptions()
        state.append_turn(ChatTurn(turn_index=state.next_turn_index(), speaker="user", text=user_text))

        descriptions = [(p.photo_id, p.cached_description or "") for p in self.manifest.photos]
        try:
            # The full history rides along on both steps, matching the
            # context the proactive engine gives its raw replies.
            selected_ids = self.gateway.select_photos(user_text, descriptions, history=state.history[:-1])
            selected = [self.manifest.photo_by_id(pid) for pid in selected_ids]
            raw_reply = self.gateway.generate_raw_reply(
                user_text, state.history[:-1], selected, portrait=self.manifest.portrait_photo
            )
        except GatewayError:
            error_turn = ChatTurn(
                turn_index=state.next_turn_index(),
                speaker="bot",
                text="Sorry, something went wrong while I was preparing a reply. Please say that again.",
                annotations=TurnAnnotations(guidance_kind=GuidanceKind.NONE),
            )
            state.append_turn(error_turn)
            return error_turn

        bot_turn = ChatTurn(
            turn_index=state.next_turn_index(),
            speaker="bot",
            text=raw_reply,
            annotations=TurnAnnotations(selected_photo_ids=selected_ids),
        )
        state.append_turn(bot_turn)
        return bot_turn
