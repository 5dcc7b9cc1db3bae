"""Dataclass configuration for the gateway, dialogue rules, and evaluation.

Defaults follow the deployed system; everything a fixture or deployment
might tune (keyword lists, thresholds, locales, backend coordinates) is a
field here. `load_config` merges a JSON file over the defaults; the model
mode additionally honours the REVIVER_MODEL_MODE environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

MODE_ENV_VAR = "REVIVER_MODEL_MODE"

DEFAULT_ACCEPTANCE_KEYWORDS = (
    "okay", "ok", "go on", "go ahead", "yes", "yeah", "yep", "sure", "sounds good", "alright", "let's go",
)
DEFAULT_REJECTION_KEYWORDS = ("no", "not yet", "nope", "not now", "later", "skip that")
DEFAULT_QUESTION_WORDS = {
    "en": (
        "what", "who", "whom", "whose", "when", "where", "why", "how", "which",
        "was", "were", "is", "are", "am", "do", "does", "did", "can", "could", "would", "will", "shall",
    ),
}
DEFAULT_QUESTION_MARKS = ("?", "？")
DEFAULT_SWITCH_PREFIXES = ("let's talk about", "lets talk about")
DEFAULT_NEXT_SCENE_PHRASES = ("next scene",)

CJK_LOCALE_PREFIXES = ("zh", "ja", "ko")


@dataclass
class GatewayConfig:
    mode: str = "mock"  # "mock" | "live"
    model_id: str = "gpt-4-vision-preview"
    temperature: float = 0.8
    max_output_chars: int = 2000
    api_base: str = "https://api.openai.com/v1"
    api_key_env: str = "REVIVER_API_KEY"
    timeout_s: float = 60.0
    transport_retries: int = 2
    parse_reprompts: int = 1
    backoff_base_s: float = 0.5
    max_concurrent: int = 4


@dataclass
class DialogueConfig:
    locale: str = "en"
    acceptance_keywords: tuple[str, ...] = DEFAULT_ACCEPTANCE_KEYWORDS
    rejection_keywords: tuple[str, ...] = DEFAULT_REJECTION_KEYWORDS
    question_words: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: {k: tuple(v) for k, v in DEFAULT_QUESTION_WORDS.items()}
    )
    question_marks: tuple[str, ...] = DEFAULT_QUESTION_MARKS
    switch_prefixes: tuple[str, ...] = DEFAULT_SWITCH_PREFIXES
    next_scene_phrases: tuple[str, ...] = DEFAULT_NEXT_SCENE_PHRASES
    mention_overlap_threshold: float = 0.6
    guidance_separator: str = "\n\n"
    activity_char_budget: int = 100

    def question_words_for(self, locale: str) -> tuple[str, ...]:
        return self.question_words.get(locale.split("-")[0], self.question_words.get("en", ()))


@dataclass
class BuildConfig:
    similarity_threshold: float = 0.5
    scorer_workers: int = 4
    # Fixed timestamp for byte-identical rebuilds; None means wall clock.
    built_at_override: str | None = None


@dataclass
class EvalConfig:
    max_turns: int = 200
    memory_ratio_locale: str = "en"


@dataclass
class AppConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    dialogue: DialogueConfig = field(default_factory=DialogueConfig)
    build: BuildConfig = field(default_factory=BuildConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    store_dir: str = "reviver_store"


def _merge(dc, data: dict):
    updates = {}
    for key, value in data.items():
        if not hasattr(dc, key):
            continue
        current = getattr(dc, key)
        if isinstance(current, tuple) and isinstance(value, list):
            value = tuple(value)
        if key == "question_words" and isinstance(value, dict):
            value = {k: tuple(v) for k, v in value.items()}
        updates[key] = value
    return replace(dc, **updates)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from defaults, an optional JSON file, and the env."""
    config = AppConfig()
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        config = AppConfig(
            gateway=_merge(config.gateway, data.get("gateway", {})),
            dialogue=_merge(config.dialogue, data.get("dialogue", {})),
            build=_merge(config.build, data.get("build", {})),
            eval=_merge(config.eval, data.get("eval", {})),
            store_dir=data.get("store_dir", config.store_dir),
        )
    mode = os.environ.get(MODE_ENV_VAR)
    if mode:
        if mode not in ("mock", "live"):
            raise ValueError(f"{MODE_ENV_VAR} must be 'mock' or 'live', got {mode!r}")
        config.gateway.mode = mode
    return config
