"""Embedded SQLite persistence for sessions and submissions.

Schema:
  sessions(id, candidate_name, candidate_age, selected_section,
           attempts_remaining, completed, dialogue_state, dialogue_slots,
           created_at)
  submissions(id, session_id, attempt_index, text, rubric_json, neural_raw,
              band, percentage, created_at)
  feedback_items(submission_id, position, item_json)

The attempt decrement is a single conditional UPDATE so that two racing
submissions on the last attempt cannot both succeed.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    id TEXT PRIMARY KEY,
    candidate_name TEXT NOT NULL DEFAULT '',
    candidate_age INTEGER,
    selected_section TEXT NOT NULL DEFAULT 'full',
    attempts_remaining INTEGER NOT NULL DEFAULT 3
        CHECK (attempts_remaining BETWEEN 0 AND 3),
    completed INTEGER NOT NULL DEFAULT 0,
    dialogue_state TEXT NOT NULL DEFAULT 'GREETING',
    dialogue_slots TEXT NOT NULL DEFAULT '{}',
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS submissions (
    id TEXT PRIMARY KEY,
    session_id TEXT NOT NULL REFERENCES sessions(id),
    attempt_index INTEGER NOT NULL CHECK (attempt_index BETWEEN 1 AND 3),
    text TEXT NOT NULL,
    rubric_json TEXT NOT NULL,
    neural_raw REAL,
    band REAL NOT NULL,
    percentage REAL NOT NULL,
    created_at REAL NOT NULL,
    UNIQUE (session_id, attempt_index)
);
CREATE TABLE IF NOT EXISTS feedback_items (
    submission_id TEXT NOT NULL REFERENCES submissions(id),
    position INTEGER NOT NULL,
    item_json TEXT NOT NULL,
    PRIMARY KEY (submission_id, position)
);
"""


class StoreError(RuntimeError):
    """Raised for missing rows or violated store invariants."""


class Store:
    """Thread-safe wrapper over a single SQLite connection."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- sessions ------------------------------------------------------

    def create_session(self, name: str = "", age: int | None = None) -> dict:
        session_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO sessions (id, candidate_name, candidate_age, created_at)"
                " VALUES (?, ?, ?, ?)",
                (session_id, name, age, time.time()),
            )
        return self.get_session(session_id)

    def get_session(self, session_id: str) -> dict:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM sessions WHERE id = ?", (session_id,)
            ).fetchone()
        if row is None:
            raise StoreError(f"session not found: {session_id}")
        session = dict(row)
        session["completed"] = bool(session["completed"])
        session["dialogue_slots"] = json.loads(session["dialogue_slots"])
        return session

    def update_session(self, session_id: str, **fields) -> None:
        allowed = {
            "candidate_name", "candidate_age", "selected_section",
            "completed", "dialogue_state", "dialogue_slots",
        }
        unknown = set(fields) - allowed
        if unknown:
            raise StoreError(f"unknown session fields: {sorted(unknown)}")
        if "dialogue_slots" in fields:
            fields["dialogue_slots"] = json.dumps(fields["dialogue_slots"])
        if "completed" in fields:
            fields["completed"] = int(fields["completed"])
        columns = ", ".join(f"{k} = ?" for k in fields)
        with self._lock, self._conn:
            cur = self._conn.execute(
                f"UPDATE sessions SET {columns} WHERE id = ?",
                (*fields.values(), session_id),
            )
        if cur.rowcount == 0:
            raise StoreError(f"session not found: {session_id}")

    def claim_attempt(self, session_id: str) -> int | None:
        """Atomically consume one attempt.

        Returns the attempt index (1..3) just claimed, or None when no
        attempts remain. Exactly one of two racing callers can claim the
        final attempt.
        """
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE sessions SET attempts_remaining = attempts_remaining - 1"
                " WHERE id = ? AND attempts_remaining > 0",
                (session_id,),
            )
            if cur.rowcount == 0:
                row = self._conn.execute(
                    "SELECT id FROM sessions WHERE id = ?", (session_id,)
                ).fetchone()
                if row is None:
                    raise StoreError(f"session not found: {session_id}")
                return None
            remaining = self._conn.execute(
                "SELECT attempts_remaining FROM sessions WHERE id = ?",
                (session_id,),
            ).fetchone()[0]
            return 3 - remaining

    def release_attempt(self, session_id: str) -> None:
        """Undo a claim when scoring fails before the record is written."""
        with self._lock, self._conn:
            self._conn.execute(
                "UPDATE sessions SET attempts_remaining = attempts_remaining + 1"
                " WHERE id = ? AND attempts_remaining < 3",
                (session_id,),
            )

    # -- submissions ---------------------------------------------------

    def add_submission(
        self,
        session_id: str,
        attempt_index: int,
        text: str,
        rubric: dict,
        neural_raw: float | None,
        band: float,
        percentage: float,
        feedback_items: list[dict],
    ) -> dict:
        submission_id = uuid.uuid4().hex
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO submissions (id, session_id, attempt_index, text,"
                " rubric_json, neural_raw, band, percentage, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    submission_id, session_id, attempt_index, text,
                    json.dumps(rubric), neural_raw, band, percentage, time.time(),
                ),
            )
            self._conn.executemany(
                "INSERT INTO feedback_items (submission_id, position, item_json)"
                " VALUES (?, ?, ?)",
                [
                    (submission_id, position, json.dumps(item))
                    for position, item in enumerate(feedback_items)
                ],
            )
        return self.get_submission(submission_id)

    def get_submission(self, submission_id: str) -> dict:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM submissions WHERE id = ?", (submission_id,)
            ).fetchone()
            if row is None:
                raise StoreError(f"submission not found: {submission_id}")
            items = self._conn.execute(
                "SELECT item_json FROM feedback_items WHERE submission_id = ?"
                " ORDER BY position",
                (submission_id,),
            ).fetchall()
        record = dict(row)
        record["rubric"] = json.loads(record.pop("rubric_json"))
        record["feedback_items"] = [json.loads(r["item_json"]) for r in items]
        return record

    def list_submissions(self, session_id: str) -> list[dict]:
        self.get_session(session_id)  # raise on unknown id
        with self._lock:
            rows = self._conn.execute(
                "SELECT id FROM submissions WHERE session_id = ?"
                " ORDER BY attempt_index",
                (session_id,),
            ).fetchall()
        return [self.get_submission(r["id"]) for r in rows]
