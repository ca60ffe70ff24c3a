"""Scripted onboarding dialogue: a small deterministic state machine that
collects the candidate's name, age, and exercise section choice."""

from __future__ import annotations

from dataclasses import dataclass, field

DIALOGUE_STATES = (
    "GREETING", "ASK_NAME", "ASK_AGE", "OFFER_EXERCISE", "SECTION_SELECT", "WRITING",
)
SECTIONS = ("introduction", "body", "conclusion", "full")

# state -> states reachable in one step (used by the graph check)
TRANSITIONS = {
    "GREETING": ("ASK_NAME",),
    "ASK_NAME": ("ASK_NAME", "ASK_AGE"),
    "ASK_AGE": ("ASK_AGE", "OFFER_EXERCISE"),
    "OFFER_EXERCISE": ("OFFER_EXERCISE", "SECTION_SELECT"),
    "SECTION_SELECT": ("SECTION_SELECT", "WRITING"),
    "WRITING": ("WRITING",),
}

MIN_AGE, MAX_AGE = 5, 120

_TEMPLATES = {
    "greet": "Hello! I am your writing coach. Let's get you set up.",
    "ask_name": "What is your name?",
    "name_reprompt": "I did not catch that. Please tell me your name.",
    "ask_age": "Nice to meet you, {name}. How old are you?",
    "age_reprompt": f"Please enter your age as a number between {MIN_AGE} and {MAX_AGE}.",
    "offer": ("Would you like to try a writing exercise? "
              "You can practise an introduction, a body paragraph, a conclusion, "
              "or a full essay. (yes/no)"),
    "reoffer": "No problem. Just say yes whenever you are ready for an exercise.",
    "select": "Great! Which section would you like to practise: introduction, body, conclusion, or full?",
    "select_reprompt": "Please choose one of: introduction, body, conclusion, full.",
    "writing": "You chose the {section} exercise. The writing area is ready; good luck!",
    "writing_idle": "You are all set. Submit your writing when you are ready.",
}

_YES = {"yes", "y", "sure", "ok", "okay", "yeah", "yep"}
_NO = {"no", "n", "not now", "later", "nope"}


@dataclass(frozen=True)
class DialogueState:
    state: str = "GREETING"
    slots: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.state not in DIALOGUE_STATES:
            raise ValueError(f"unknown dialogue state: {self.state}")


def initial_state() -> DialogueState:
    return DialogueState()


def _parse_age(text: str) -> int | None:
    token = text.strip().rstrip(".!")
    if not token.lstrip("+").isdigit():
        return None
    age = int(token)
    return age if MIN_AGE <= age <= MAX_AGE else None


def dialogue_step(state: DialogueState, user_input: str) -> tuple[str, DialogueState]:
    """One turn of the onboarding chat. Invalid input re-prompts without
    changing state; replies come from a fixed template catalog."""
    text = (user_input or "").strip()
    slots = dict(state.slots)

    if state.state == "GREETING":
        return (
            _TEMPLATES["greet"] + " " + _TEMPLATES["ask_name"],
            DialogueState("ASK_NAME", slots),
        )

    if state.state == "ASK_NAME":
        if not text:
            return _TEMPLATES["name_reprompt"], state
        slots["candidate_name"] = text
        return _TEMPLATES["ask_age"].format(name=text), DialogueState("ASK_AGE", slots)

    if state.state == "ASK_AGE":
        age = _parse_age(text)
        if age is None:
            return _TEMPLATES["age_reprompt"], state
        slots["candidate_age"] = age
        return _TEMPLATES["offer"], DialogueState("OFFER_EXERCISE", slots)

    if state.state == "OFFER_EXERCISE":
        lowered = text.lower()
        if lowered in _YES:
            return _TEMPLATES["select"], DialogueState("SECTION_SELECT", slots)
        if lowered in _NO:
            return _TEMPLATES["reoffer"], state
        return _TEMPLATES["offer"], state

    if state.state == "SECTION_SELECT":
        lowered = text.lower()
        if lowered in SECTIONS:
            slots["selected_section"] = lowered
            return (
                _TEMPLATES["writing"].format(section=lowered),
                DialogueState("WRITING", slots),
            )
        return _TEMPLATES["select_reprompt"], state

    return _TEMPLATES["writing_idle"], state
