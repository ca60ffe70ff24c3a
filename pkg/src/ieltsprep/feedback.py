"""Adaptive feedback: rubric deviations and grammar issues turned into
prioritized, criterion-tagged items, plus machine-applicable edit plans.

Message texts live in data/feedback_templates.json so wording can change
without touching logic. Priorities are deviation-from-mean with forced
severity boosts (an under-length essay always yields a TA weakness).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, asdict
from importlib import resources
from statistics import mean

from .features import FeatureVector, TokenizedEssay, paragraph_sentence_spans, WORD_RE
from .grammar import GrammarIssue
from .rule_scorer import RubricScores

CRITERIA = ("TA", "CC", "LR", "GRA")

SEVERITY_BOOSTS = {
    "ta_short_essay": 1.0,
    "gra_has_issues": 0.25,
}

# common word -> rarer replacement, used for LR upgrade suggestions
SYNONYM_UPGRADES = {
    "good": "beneficial",
    "bad": "detrimental",
    "big": "substantial",
    "important": "crucial",
    "many": "numerous",
    "get": "obtain",
    "show": "demonstrate",
}

CONNECTOR_CHOICES = ("Furthermore", "Moreover", "In addition")
TOPIC_SENTENCE_TEMPLATE = "This essay examines the question from several points of view."

EDIT_KINDS = ("replace_span", "insert_connector", "split_paragraph", "add_topic_sentence")


class FeedbackError(ValueError):
    """Raised when feedback inputs are mutually inconsistent."""


@dataclass(frozen=True)
class SpanFix:
    start: int
    end: int
    replacement: str


@dataclass(frozen=True)
class FeedbackItem:
    criterion: str  # TA | CC | LR | GRA
    polarity: str  # strength | weakness
    message: str
    priority: float
    suggestion: str | None = None
    condition: str = ""
    spans: tuple[SpanFix, ...] = ()

    def __post_init__(self):
        if self.polarity == "weakness" and not self.suggestion:
            raise FeedbackError("weakness items must carry a suggestion")


@dataclass(frozen=True)
class FeedbackReport:
    predicted_band: float
    items: tuple[FeedbackItem, ...]
    per_criterion_scores: RubricScores

    def to_dict(self) -> dict:
        return {
            "predicted_band": self.predicted_band,
            "per_criterion_scores": self.per_criterion_scores.to_dict(),
            "items": [
                {
                    "criterion": item.criterion,
                    "polarity": item.polarity,
                    "message": item.message,
                    "suggestion": item.suggestion,
                    "priority": item.priority,
                    "condition": item.condition,
                    "spans": [asdict(s) for s in item.spans],
                }
                for item in self.items
            ],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "FeedbackReport":
        return cls(
            predicted_band=raw["predicted_band"],
            per_criterion_scores=RubricScores(**raw["per_criterion_scores"]),
            items=tuple(
                FeedbackItem(
                    criterion=i["criterion"],
                    polarity=i["polarity"],
                    message=i["message"],
                    suggestion=i.get("suggestion"),
                    priority=i["priority"],
                    condition=i.get("condition", ""),
                    spans=tuple(SpanFix(**s) for s in i.get("spans", [])),
                )
                for i in raw["items"]
            ),
        )


def _templates() -> dict:
    return json.loads(
        resources.files("ieltsprep.data").joinpath("feedback_templates.json").read_text("utf-8")
    )


_TEMPLATES = _templates()


def _weakness_condition(criterion, features: FeatureVector, issues, required_word_count) -> str:
    if criterion == "TA":
        return "short_essay" if features.word_count < required_word_count else "keyword_coverage"
    if criterion == "CC":
        if features.connector_density < 0.5:
            return "few_connectors"
        if not (3 <= features.paragraph_count <= 5):
            return "paragraphs"
        return "generic"
    if criterion == "LR":
        if features.sophistication_ratio < 0.2:
            return "low_sophistication"
        if features.lexical_diversity < 0.4:
            return "low_diversity"
        return "generic"
    return "grammar_issues" if issues else "generic"


def generate_feedback(
    essay: TokenizedEssay,
    features: FeatureVector,
    rubric: RubricScores,
    predicted: float,
    issues: list[GrammarIssue],
    required_word_count: int = 250,
) -> FeedbackReport:
    """Deterministic report; each criterion appears exactly once.

    Criteria scoring below the mean (and the lowest criterion, tie broken
    in TA, CC, LR, GRA order) become weaknesses; the rest strengths.
    """
    if features.word_count != essay.word_count:
        raise FeedbackError(
            f"inconsistent inputs: features cover {features.word_count} words, "
            f"essay has {essay.word_count}"
        )
    scores = {c: rubric.criterion(c) for c in CRITERIA}
    criterion_mean = mean(scores.values())
    lowest = min(CRITERIA, key=lambda c: (scores[c], CRITERIA.index(c)))

    items = []
    for criterion in CRITERIA:
        score = scores[criterion]
        forced_ta = criterion == "TA" and features.word_count < required_word_count
        is_weakness = criterion == lowest or score < criterion_mean - 1e-9 or forced_ta
        priority = max(0.0, criterion_mean - score)
        if is_weakness:
            condition = _weakness_condition(criterion, features, issues, required_word_count)
            if condition == "short_essay":
                priority += SEVERITY_BOOSTS["ta_short_essay"]
            if criterion == "GRA" and issues:
                priority += SEVERITY_BOOSTS["gra_has_issues"]
            template = _TEMPLATES[criterion]["weakness"][condition]
            spans = ()
            if criterion == "GRA":
                spans = tuple(
                    SpanFix(start=i.span[0], end=i.span[1], replacement=i.suggestion)
                    for i in issues
                    if i.suggestion is not None
                )
            items.append(FeedbackItem(
                criterion=criterion, polarity="weakness",
                message=template["message"], suggestion=template["suggestion"],
                priority=priority, condition=condition, spans=spans,
            ))
        else:
            items.append(FeedbackItem(
                criterion=criterion, polarity="strength",
                message=_TEMPLATES[criterion]["strength"],
                priority=priority, condition="strength",
            ))
    items.sort(key=lambda i: (-i.priority, CRITERIA.index(i.criterion)))
    return FeedbackReport(
        predicted_band=predicted, items=tuple(items), per_criterion_scores=rubric
    )


# ---------------------------------------------------------------------------
# Edit plans


@dataclass(frozen=True)
class Edit:
    kind: str  # one of EDIT_KINDS
    start: int
    end: int  # == start for pure insertions
    replacement: str
    criterion: str
    priority: float

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise FeedbackError(f"unknown edit kind {self.kind!r}")

    @property
    def inserted_words(self) -> int:
        return len(WORD_RE.findall(self.replacement))


@dataclass(frozen=True)
class EditPlan:
    edits: tuple[Edit, ...]
    dropped_overlaps: tuple[Edit, ...] = ()
    # audit: net word-count change ceiling declared up front
    declared_insertions: int = 0


def _overlaps(a: Edit, b: Edit) -> bool:
    if a.start == a.end and b.start == b.end:
        return a.start == b.start
    return a.start < max(b.end, b.start + 1) and b.start < max(a.end, a.start + 1)


def _item_priority(report: FeedbackReport, criterion: str) -> float:
    for item in report.items:
        if item.criterion == criterion:
            return item.priority
    return 0.0


def feedback_to_edit_plan(report: FeedbackReport, text: str) -> EditPlan:
    """Turn weakness items into non-overlapping, machine-applicable edits.

    Edits are ordered by descending source-item priority, then ascending
    position; later edits overlapping an earlier one are dropped and
    recorded in the plan.
    """
    candidates: list[Edit] = []
    spans_by_paragraph = paragraph_sentence_spans(text)
    connector_index = 0

    for item in report.items:
        if item.polarity != "weakness":
            continue
        if item.criterion == "GRA":
            for fix in item.spans:
                candidates.append(Edit(
                    kind="replace_span", start=fix.start, end=fix.end,
                    replacement=fix.replacement, criterion="GRA", priority=item.priority,
                ))
        elif item.criterion == "CC":
            if item.condition == "few_connectors" or item.condition == "generic":
                for sentences in spans_by_paragraph:
                    if len(sentences) >= 2:
                        start = sentences[1][0]
                        connector = CONNECTOR_CHOICES[connector_index % len(CONNECTOR_CHOICES)]
                        connector_index += 1
                        candidates.append(Edit(
                            kind="insert_connector", start=start, end=start,
                            replacement=f"{connector}, ", criterion="CC",
                            priority=item.priority,
                        ))
            if item.condition == "paragraphs" and len(spans_by_paragraph) < 3:
                for sentences in spans_by_paragraph:
                    if len(sentences) >= 4:
                        middle = len(sentences) // 2
                        gap_start = sentences[middle - 1][1]
                        gap_end = sentences[middle][0]
                        candidates.append(Edit(
                            kind="split_paragraph", start=gap_start, end=gap_end,
                            replacement="\n\n", criterion="CC", priority=item.priority,
                        ))
                        break
        elif item.criterion == "TA":
            if spans_by_paragraph:
                target = spans_by_paragraph[1] if len(spans_by_paragraph) > 1 else spans_by_paragraph[0]
                start = target[0][0]
                candidates.append(Edit(
                    kind="add_topic_sentence", start=start, end=start,
                    replacement=TOPIC_SENTENCE_TEMPLATE + " ", criterion="TA",
                    priority=item.priority,
                ))
        elif item.criterion == "LR":
            upgrades = 0
            for word, replacement in SYNONYM_UPGRADES.items():
                match = re.search(rf"\b{word}\b", text, re.IGNORECASE)
                if match:
                    fixed = replacement.capitalize() if match.group(0)[0].isupper() else replacement
                    candidates.append(Edit(
                        kind="replace_span", start=match.start(), end=match.end(),
                        replacement=fixed, criterion="LR", priority=item.priority,
                    ))
                    upgrades += 1
                    if upgrades == 2:
                        break

    candidates.sort(key=lambda e: (-e.priority, e.start, EDIT_KINDS.index(e.kind)))
    kept: list[Edit] = []
    dropped: list[Edit] = []
    for edit in candidates:
        if any(_overlaps(edit, existing) for existing in kept):
            dropped.append(edit)
        else:
            kept.append(edit)
    return EditPlan(
        edits=tuple(kept),
        dropped_overlaps=tuple(dropped),
        declared_insertions=sum(e.inserted_words for e in kept),
    )


def apply_edits(text: str, edits) -> str:
    """Apply non-overlapping edits; positions refer to the original text."""
    for edit in sorted(edits, key=lambda e: e.start, reverse=True):
        text = text[: edit.start] + edit.replacement + text[edit.end :]
    return text
