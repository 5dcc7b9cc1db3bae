"""Prompt templates for the five model tasks.

Extraction prompts encode the recall guidelines gathered from blind and
low-vision photo owners: activities are pinned down through the who /
what / when / where aspects (landmarks, signs and other in-photo text,
clothing and lighting for the season and time of day, visual appearance
of companions, human actions and objects), and details are grouped into
the categories people, food, animals, plants, buildings, texts, others.
"""

from __future__ import annotations

from ..domain import ChatTurn, SceneActivity, SceneDetail

ACTIVITY_GUIDELINES = """\
Work out the activity captured by these photos along four aspects, and give the visual
evidence for each aspect you can infer:
- where: landmarks, surroundings (sea, hills, canteens, museums), and places named in
  texts such as entrance signs or banners.
- when: the season from clothes or tree leaves, day or night from lighting, and any
  dates or times readable in texts such as banners or screens.
- who: people's visual appearance (age, gender, clothes, hair) and names readable in
  texts such as name tags or badges.
- what: human actions (e.g. playing an instrument), prominent objects (food, animals,
  rides), and activities named in texts such as menus or conference banners."""

DETAIL_GUIDELINES = """\
List the visual details worth telling the owner about, one entry per object or aspect.
Allowed categories and what to cover:
- people: how many, plus gender, age, hair, clothes, facial expression, pose.
- food: name, color, shape.
- animals: breed, color, size.
- plants: species, color, shape, height.
- buildings: color, shape, style.
- texts: the raw text and where it appears (e.g. on a screen).
- others: color, shape, and anything else notable."""


def describe_photo(locale: str) -> str:
    return (
        "Describe this photo for its owner in one short paragraph. "
        "Mention the setting, the people, and anything distinctive. "
        f"Answer in the language tagged '{locale}'."
    )


def score_similarity() -> str:
    return (
        "These two photos are adjacent in a chronologically ordered collection. "
        "Assess the activity similarity between the two photos on a scale of 0 to 1, "
        "where 1 means they capture the same activity (same who, what, when, where) "
        "and 0 means entirely different activities. Reply with the number only."
    )


def extract_scene(photo_count: int, has_portrait: bool) -> str:
    portrait_note = (
        "The final image is a portrait of the owner; use it to recognize the owner in "
        "the scene photos, and do not treat it as part of the scene.\n"
        if has_portrait
        else ""
    )
    return (
        f"All {photo_count} photos below come from one scene of the owner's photo collection.\n"
        f"{portrait_note}"
        f"{ACTIVITY_GUIDELINES}\n\n"
        f"{DETAIL_GUIDELINES}\n\n"
        "Answer with a fenced JSON block shaped as:\n"
        "```json\n"
        '{"activity": {"sentence": "...", "aspects": {"who": null, "what": "...", '
        '"when": null, "where": "..."}, "reasons": ["..."]},\n'
        ' "details": [{"category": "people", "description": "..."}]}\n'
        "```\n"
        "Keep the activity sentence under 100 characters."
    )


def shorter_activity_reprompt(budget: int) -> str:
    return (
        f"The activity sentence was too long. Repeat the same JSON payload but make the "
        f"activity sentence at most {budget} characters."
    )


def generate_storyline(scene_infos: list[tuple[SceneActivity, list[SceneDetail]]]) -> str:
    blocks = []
    for index, (activity, details) in enumerate(scene_infos, start=1):
        lines = [f"Scene {index}: {activity.sentence}"]
        lines += [f"  - {d.category.value}: {d.description}" for d in details]
        blocks.append("\n".join(lines))
    scene_dump = "\n".join(blocks)
    return (
        "Here is the extracted information for every scene of a photo collection, in "
        "chronological order:\n\n"
        f"{scene_dump}\n\n"
        "Summarize each scene briefly with a short sentence and then list them in "
        "chronological order from the beginning to the end. Answer with a fenced JSON "
        "array of exactly "
        f"{len(scene_infos)} strings, one per scene, in the same order."
    )


def storyline_count_reprompt(expected: int) -> str:
    return (
        f"Your list had the wrong length. Reply again with a fenced JSON array of exactly "
        f"{expected} one-sentence summaries, one per scene, in order."
    )


def generate_reply(user_input: str, history: list[ChatTurn]) -> str:
    rendered = "\n".join(f"{t.speaker}: {t.text}" for t in history)
    return (
        "Your task is to generate a response to the user input, based on the chat history "
        "and the photos.\n\n"
        f"Chat history:\n{rendered}\n\n"
        f"User input: {user_input}"
    )


def select_photos(user_input: str, descriptions: list[tuple[str, str]], history: list[ChatTurn]) -> str:
    listing = "\n".join(f"- {photo_id}: {text}" for photo_id, text in descriptions)
    rendered = "\n".join(f"{t.speaker}: {t.text}" for t in history)
    history_block = f"Chat history:\n{rendered}\n\n" if rendered else ""
    return (
        "Below are text descriptions of every photo in a collection. Select the five "
        "photos most relevant to the user's message.\n\n"
        f"Photos:\n{listing}\n\n"
        f"{history_block}"
        f"User message: {user_input}\n\n"
        "Answer with a fenced JSON array of up to five photo ids from the list."
    )
