"""Closed-loop revision experiment: persona-constrained edits from
feedback, rescored with a frozen model.

Five scripted personas (surface, structural, selective, coherence,
conservative) differ in which edit kinds they accept, how reliably they
comply, and what structural constraints their revisions must satisfy.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .corpus import EssayRecord
from .features import WORD_RE, build_features, load_connectors, tokenize
from .feedback import Edit, EditPlan, apply_edits, feedback_to_edit_plan, generate_feedback
from .metrics import StatsReport, paired_tests
from .neural.model import ModelArtifact, predict_batch
from .rule_scorer import RuleScorerConfig, DEFAULT_CONFIG, TaskSpec, score_rubric

COMPLIANCE_HIGH = 0.9
COMPLIANCE_MEDIUM = 0.6
COMPLIANCE_LOW_MEDIUM = 0.4


class ExperimentError(ValueError):
    """Raised for invalid experiment specs or constraint violations."""


@dataclass(frozen=True)
class Persona:
    id: str
    style: str
    compliance: float
    allowed_actions: frozenset[str]
    band_level: str  # reporting metadata only
    max_edits: int | None = None  # P3's selective cap
    paragraphs_locked: bool = False  # P1/P5: paragraph count unchanged
    paragraphs_increase_only: bool = False  # P2
    lexicon_gated: bool = False  # P4: no new out-of-lexicon words

    def with_compliance(self, compliance: float) -> "Persona":
        values = asdict(self)
        values["compliance"] = compliance
        values["allowed_actions"] = self.allowed_actions
        return Persona(**values)


DEFAULT_PERSONAS = (
    Persona(
        id="P1", style="surface", compliance=COMPLIANCE_HIGH,
        allowed_actions=frozenset({"replace_span"}),
        band_level="6.5", paragraphs_locked=True,
    ),
    Persona(
        id="P2", style="structural", compliance=COMPLIANCE_MEDIUM,
        allowed_actions=frozenset({"split_paragraph", "add_topic_sentence", "replace_span"}),
        band_level="6.5-6.8", paragraphs_increase_only=True,
    ),
    Persona(
        id="P3", style="selective", compliance=COMPLIANCE_LOW_MEDIUM,
        allowed_actions=frozenset({"replace_span", "insert_connector", "split_paragraph", "add_topic_sentence"}),
        band_level="6.8", max_edits=2,
    ),
    Persona(
        id="P4", style="coherence", compliance=COMPLIANCE_HIGH,
        allowed_actions=frozenset({"insert_connector", "replace_span"}),
        band_level="7.0", lexicon_gated=True,
    ),
    Persona(
        id="P5", style="conservative", compliance=COMPLIANCE_MEDIUM,
        allowed_actions=frozenset({"replace_span", "insert_connector"}),
        band_level="6.7", paragraphs_locked=True,
    ),
)


@dataclass(frozen=True)
class ExperimentSpec:
    essays: tuple[EssayRecord, ...]
    personas: tuple[Persona, ...] = DEFAULT_PERSONAS
    essays_per_persona: int = 6
    seed: int = 0

    def __post_init__(self):
        expected = len(self.personas) * self.essays_per_persona
        if len(self.essays) != expected:
            raise ExperimentError(
                f"expected {expected} essays ({len(self.personas)} personas x "
                f"{self.essays_per_persona}), got {len(self.essays)}"
            )
        ids = [e.id for e in self.essays]
        if len(set(ids)) != len(ids):
            raise ExperimentError("duplicate essay ids in experiment spec")


@dataclass(frozen=True)
class RevisionResult:
    essay_id: str
    persona_id: str
    original_raw: float
    original_band: float
    revised_text: str
    revised_raw: float
    revised_band: float
    delta_raw: float
    edits_applied: tuple[dict, ...]
    edits_skipped: tuple[dict, ...]
    edits_rolled_back: tuple[dict, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def assign_essays(spec: ExperimentSpec) -> dict[str, list[EssayRecord]]:
    """Seeded uniform partition of the essays across personas."""
    shuffled = list(spec.essays)
    random.Random(spec.seed).shuffle(shuffled)
    assignment = {}
    for i, persona in enumerate(spec.personas):
        chunk = shuffled[i * spec.essays_per_persona : (i + 1) * spec.essays_per_persona]
        assignment[persona.id] = sorted(chunk, key=lambda e: e.id)
    return assignment


def _edit_coin(seed: int, essay_id: str, edit_index: int) -> random.Random:
    return random.Random(f"{seed}:{essay_id}:{edit_index}")


def _edit_dict(edit: Edit) -> dict:
    return {
        "kind": edit.kind, "start": edit.start, "end": edit.end,
        "replacement": edit.replacement, "criterion": edit.criterion,
    }


def _new_words(edit: Edit, essay_words: set[str], lexicon: frozenset[str]) -> list[str]:
    return [
        w.lower()
        for w in WORD_RE.findall(edit.replacement)
        if w.lower() not in lexicon and w.lower() not in essay_words
    ]


def apply_revision(
    essay: EssayRecord,
    report,
    persona: Persona,
    seed: int,
    lexicon: frozenset[str],
    plan: EditPlan | None = None,
) -> tuple[str, dict]:
    """Apply the persona-filtered edit plan with per-edit compliance draws.

    Returns the revised text and an audit of applied / skipped / filtered
    / rolled-back edits.
    """
    if plan is None:
        plan = feedback_to_edit_plan(report, essay.body)
    candidates = [e for e in plan.edits if e.kind in persona.allowed_actions]
    filtered_out = [e for e in plan.edits if e.kind not in persona.allowed_actions]

    if persona.lexicon_gated:
        essay_words = {w.lower() for w in WORD_RE.findall(essay.body)}
        gated = [e for e in candidates if _new_words(e, essay_words, lexicon)]
        candidates = [e for e in candidates if not _new_words(e, essay_words, lexicon)]
        filtered_out += gated

    if persona.max_edits is not None:
        k_rng = _edit_coin(seed, essay.id, -1)
        k = 1 + (k_rng.random() < 0.5)
        k = min(min(k, persona.max_edits), len(candidates))
        filtered_out += candidates[k:]
        candidates = candidates[:k]

    applied, skipped = [], []
    for index, edit in enumerate(candidates):
        if _edit_coin(seed, essay.id, index).random() < persona.compliance:
            applied.append(edit)
        else:
            skipped.append(edit)

    original_paragraphs = tokenize(essay.body).paragraph_count
    rolled_back = []
    while True:
        revised = apply_edits(essay.body, applied)
        revised_paragraphs = tokenize(revised).paragraph_count
        violation = (
            persona.paragraphs_locked and revised_paragraphs != original_paragraphs
        ) or (persona.paragraphs_increase_only and revised_paragraphs < original_paragraphs)
        if not violation:
            break
        structural = [e for e in applied if e.kind in ("split_paragraph", "add_topic_sentence")]
        target = structural[-1] if structural else applied[-1]
        applied.remove(target)
        rolled_back.append(target)
        if not applied:
            revised = essay.body
            break

    audit = {
        "applied": [_edit_dict(e) for e in applied],
        "skipped": [_edit_dict(e) for e in skipped],
        "filtered": [_edit_dict(e) for e in filtered_out],
        "rolled_back": [_edit_dict(e) for e in rolled_back],
        "dropped_overlaps": [_edit_dict(e) for e in plan.dropped_overlaps],
    }
    return revised, audit


def run_experiment(
    spec: ExperimentSpec,
    model: ModelArtifact,
    lexicon: frozenset[str],
    backend,
    task: TaskSpec = TaskSpec(),
    rule_config: RuleScorerConfig = DEFAULT_CONFIG,
    connectors=None,
) -> tuple[list[RevisionResult], StatsReport, list[dict]]:
    """Score, give feedback, revise per persona, rescore with the same
    frozen pipeline. Returns per-essay results, paired statistics, and
    the per-persona aggregate table.
    """
    if connectors is None:
        connectors = load_connectors()
    trained_ids = {i for ids in model.dataset_ids.values() for i in ids}
    leaked = trained_ids & {e.id for e in spec.essays}
    if leaked:
        raise ExperimentError(f"experiment essays overlap model data: {sorted(leaked)[:5]}")

    hash_before = model.weights_hash()
    assignment = assign_essays(spec)
    results: list[RevisionResult] = []

    for persona in spec.personas:
        for essay in assignment[persona.id]:
            (original_raw, original_band), = predict_batch(
                model, [essay], lexicon, backend, connectors
            )
            tokenized = tokenize(essay.body)
            issues = backend.check(essay.body)
            features = build_features(essay.body, tokenized, len(issues), lexicon, connectors)
            rubric = score_rubric(features, tokenized, task, rule_config)
            report = generate_feedback(
                tokenized, features, rubric, original_band, issues,
                required_word_count=task.required_word_count,
            )
            revised_text, audit = apply_revision(essay, report, persona, spec.seed, lexicon)
            (revised_raw, revised_band), = predict_batch(
                model, [revised_text], lexicon, backend, connectors
            )
            results.append(RevisionResult(
                essay_id=essay.id,
                persona_id=persona.id,
                original_raw=original_raw,
                original_band=original_band,
                revised_text=revised_text,
                revised_raw=revised_raw,
                revised_band=revised_band,
                delta_raw=revised_raw - original_raw,
                edits_applied=tuple(audit["applied"]),
                edits_skipped=tuple(audit["skipped"]),
                edits_rolled_back=tuple(audit["rolled_back"]),
            ))

    if model.weights_hash() != hash_before:
        raise ExperimentError("model weights changed during the experiment run")

    results.sort(key=lambda r: r.essay_id)
    stats = paired_tests(
        [r.original_raw for r in results], [r.revised_raw for r in results]
    )
    table = persona_table(results, spec.personas)
    return results, stats, table


def persona_table(results: list[RevisionResult], personas=DEFAULT_PERSONAS) -> list[dict]:
    table = []
    for persona in personas:
        group = [r for r in results if r.persona_id == persona.id]
        if not group:
            continue
        n = len(group)
        table.append({
            "persona": persona.id,
            "style": persona.style,
            "band_level": persona.band_level,
            "essays": n,
            "original_mean": sum(r.original_raw for r in group) / n,
            "revised_mean": sum(r.revised_raw for r in group) / n,
            "delta_mean": sum(r.delta_raw for r in group) / n,
            "pct_improved": 100.0 * sum(1 for r in group if r.delta_raw > 0) / n,
        })
    return table


def write_experiment_outputs(out_dir: str | Path, results, stats, table) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for result in results:
        with open(out_dir / f"{result.essay_id}.json", "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=2)
    with open(out_dir / "experiment_report.json", "w", encoding="utf-8") as fh:
        json.dump({"stats": stats.to_dict(), "personas": table}, fh, indent=2)
