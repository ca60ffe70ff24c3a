"""HTTP service: onboarding dialogue, essay submission with scoring and
feedback, attempt limits, and progress tracking.

The scoring path is exactly the offline pipeline: rule scorer always runs
and fills the per-criterion fields; when a model artifact is configured
its band is authoritative for the reported band and percentage.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..features import build_features, load_connectors, load_frequency_lexicon, tokenize
from ..feedback import generate_feedback
from ..grammar import make_backend
from ..neural.model import ModelArtifact, predict_batch
from ..rule_scorer import TaskSpec, score_rubric
from .dialogue import DialogueState, dialogue_step
from .store import Store, StoreError

MAX_SUBMISSION_WORDS = 10_000
SECTION_WORD_TARGETS = {"introduction": 50, "body": 150, "conclusion": 50, "full": 250}

TASKS = {
    section: {
        "id": section,
        "instructions": (
            "Some people think that governments should invest more in public "
            "education, while others believe funds are better spent elsewhere. "
            "Discuss both views and give your own opinion. "
            + ("Write the full essay." if section == "full"
               else f"Write only the {section} of the essay.")
        ),
        "reference_image": f"/static/tasks/{section}.png",
        "required_word_count": target,
    }
    for section, target in SECTION_WORD_TARGETS.items()
}


@dataclass(frozen=True)
class ServiceConfig:
    model_path: str | None = None
    grammar_backend: str = "builtin"
    languagetool_url: str = "http://localhost:8081"
    store_path: str = ":memory:"
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        return cls(
            model_path=os.environ.get("IELTSPREP_MODEL") or None,
            grammar_backend=os.environ.get("IELTSPREP_GRAMMAR_BACKEND", "builtin"),
            languagetool_url=os.environ.get("IELTSPREP_LANGUAGETOOL_URL", "http://localhost:8081"),
            store_path=os.environ.get("IELTSPREP_STORE", ":memory:"),
            host=os.environ.get("IELTSPREP_HOST", "127.0.0.1"),
            port=int(os.environ.get("IELTSPREP_PORT", "8000")),
        )


class SessionCreate(BaseModel):
    name: str = ""
    age: int | None = None


class DialogueMessage(BaseModel):
    message: str = ""


class SubmissionBody(BaseModel):
    text: str


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _session_payload(session: dict) -> dict:
    return {
        "id": session["id"],
        "candidate_name": session["candidate_name"],
        "candidate_age": session["candidate_age"],
        "selected_section": session["selected_section"],
        "attempts_remaining": session["attempts_remaining"],
        "completed": session["completed"],
        "dialogue_state": session["dialogue_state"],
        "created_at": session["created_at"],
    }


def create_app(config: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="ieltsprep service")
    store = Store(config.store_path)
    lexicon = load_frequency_lexicon()
    connectors = load_connectors()
    backend = make_backend(config.grammar_backend, base_url=config.languagetool_url)
    # preloaded once so submissions never pay the model load cost
    model = ModelArtifact.load(config.model_path) if config.model_path else None
    app.state.store = store
    app.state.model = model
    app.state.config = config

    @app.exception_handler(HTTPException)
    async def _handle_http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(StoreError)
    async def _handle_store_error(request: Request, exc: StoreError):
        return JSONResponse(status_code=404, content={"code": "not_found", "message": str(exc)})

    def score_text(text: str, section: str) -> dict:
        target = SECTION_WORD_TARGETS[section]
        task = TaskSpec(required_word_count=target)
        tokenized = tokenize(text)
        issues = backend.check(text)
        features = build_features(text, tokenized, len(issues), lexicon, connectors)
        rubric = score_rubric(features, tokenized, task)
        neural_raw = None
        band = rubric.overall
        if model is not None:
            (neural_raw, band), = predict_batch(model, [text], lexicon, backend, connectors)
        report = generate_feedback(
            tokenized, features, rubric, band, issues, required_word_count=target
        )
        return {
            "rubric": rubric.to_dict(),
            "neural_raw": neural_raw,
            "band": band,
            "percentage": round(band / 9.0 * 100.0, 1),
            "feedback": report.to_dict(),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        if body.age is not None and not 5 <= body.age <= 120:
            raise _error(400, "invalid_age", "age must be an integer in [5, 120]")
        session = store.create_session(body.name, body.age)
        return _session_payload(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_payload(store.get_session(session_id))

    @app.post("/sessions/{session_id}/dialogue")
    def dialogue(session_id: str, body: DialogueMessage):
        session = store.get_session(session_id)
        state = DialogueState(session["dialogue_state"], session["dialogue_slots"])
        reply, next_state = dialogue_step(state, body.message)
        updates: dict = {
            "dialogue_state": next_state.state,
            "dialogue_slots": next_state.slots,
        }
        if "candidate_name" in next_state.slots:
            updates["candidate_name"] = next_state.slots["candidate_name"]
        if "candidate_age" in next_state.slots:
            updates["candidate_age"] = next_state.slots["candidate_age"]
        if "selected_section" in next_state.slots:
            updates["selected_section"] = next_state.slots["selected_section"]
        store.update_session(session_id, **updates)
        return {"reply": reply, "state": next_state.state, "slots": next_state.slots}

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        if task_id not in TASKS:
            raise _error(404, "not_found", f"task not found: {task_id}")
        return TASKS[task_id]

    @app.post("/sessions/{session_id}/submissions", status_code=201)
    def submit(session_id: str, body: SubmissionBody):
        session = store.get_session(session_id)
        text = body.text
        if not text.strip():
            raise _error(400, "empty_text", "submission text is empty")
        if tokenize(text).word_count > MAX_SUBMISSION_WORDS:
            raise _error(
                400, "text_too_long",
                f"submission exceeds {MAX_SUBMISSION_WORDS} words",
            )
        attempt_index = store.claim_attempt(session_id)
        if attempt_index is None:
            raise _error(409, "attempt_limit", "attempt limit reached")
        try:
            scored = score_text(text, session["selected_section"])
            record = store.add_submission(
                session_id, attempt_index, text,
                scored["rubric"], scored["neural_raw"],
                scored["band"], scored["percentage"],
                scored["feedback"]["items"],
            )
        except Exception:
            store.release_attempt(session_id)
            raise
        final = attempt_index == 3
        if final:
            store.update_session(session_id, completed=True)
        updated = store.get_session(session_id)
        return {
            "id": record["id"],
            "session_id": session_id,
            "attempt_index": attempt_index,
            "attempts_remaining": updated["attempts_remaining"],
            "final": final,
            "band": scored["band"],
            "percentage": scored["percentage"],
            "neural_raw": scored["neural_raw"],
            "rubric": scored["rubric"],
            "feedback": scored["feedback"],
        }

    @app.get("/sessions/{session_id}/progress")
    def progress(session_id: str):
        submissions = store.list_submissions(session_id)
        summaries = []
        previous_raw = None
        for record in submissions:
            raw = record["neural_raw"] if record["neural_raw"] is not None else record["band"]
            delta = None if previous_raw is None else raw - previous_raw
            summaries.append({
                "attempt_index": record["attempt_index"],
                "band": record["band"],
                "percentage": record["percentage"],
                "delta": delta,
            })
            previous_raw = raw
        return {"session_id": session_id, "submissions": summaries}

    return app
