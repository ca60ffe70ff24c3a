from .dialogue import (  # noqa: F401
    DIALOGUE_STATES,
    SECTIONS,
    TRANSITIONS,
    DialogueState,
    dialogue_step,
    initial_state,
)
from .store import Store, StoreError  # noqa: F401
from .app import ServiceConfig, create_app  # noqa: F401
