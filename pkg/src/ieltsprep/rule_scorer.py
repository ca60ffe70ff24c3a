"""Rule-based four-criterion scorer with config-overridable mapping tables.

The shipped defaults are the post-remediation formulation (linear word
count scaling for TA, sophistication-blended LR, error-density table for
GRA). An alternate table approximating the earlier generation lives in
configs/rule_scorer_legacy.json for A/B benchmarking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from statistics import mean

from .corpus import clamp_band, round_to_band
from .features import FeatureVector, TokenizedEssay, build_features, tokenize


@dataclass(frozen=True)
class RubricScores:
    ta: float
    cc: float
    lr: float
    gra: float
    overall: float
    percentage: float

    CRITERIA = ("ta", "cc", "lr", "gra")

    def criterion(self, name: str) -> float:
        return getattr(self, name.lower())

    def to_dict(self) -> dict:
        return asdict(self)


def make_rubric_scores(ta: float, cc: float, lr: float, gra: float) -> RubricScores:
    overall = round_to_band(mean((ta, cc, lr, gra)))
    return RubricScores(
        ta=ta, cc=cc, lr=lr, gra=gra,
        overall=overall,
        percentage=round(overall / 9.0 * 100.0, 1),
    )


@dataclass(frozen=True)
class TaskSpec:
    required_word_count: int = 250
    prompt_keywords: tuple[str, ...] = ()

    def __post_init__(self):
        if self.required_word_count <= 0:
            raise ValueError("required_word_count must be positive")


@dataclass(frozen=True)
class RuleScorerConfig:
    # TA: keyword coverage mapped onto [ta_floor, ta_ceiling], then scaled
    # linearly by word count up to the requirement.
    ta_floor: float = 4.0
    ta_ceiling: float = 9.0
    word_count_scaling: bool = True
    # GRA: (max errors per 100 words, band) rows, first matching row wins.
    gra_table: tuple[tuple[float, float], ...] = (
        (0.0, 9.0), (1.0, 8.0), (2.0, 7.0), (4.0, 6.0), (6.0, 5.0), (8.0, 4.0),
    )
    gra_fallback: float = 3.0
    # LR: blend of sophistication and diversity mapped from [0, lr_blend_max]
    # onto [lr_floor, lr_ceiling].
    lr_sophistication_weight: float = 0.6
    lr_diversity_weight: float = 0.4
    lr_blend_max: float = 0.6
    lr_floor: float = 4.0
    lr_ceiling: float = 9.0
    # CC: base plus saturating connector bonus plus structure bonuses.
    cc_base: float = 5.0
    cc_connector_bonus: float = 1.5
    cc_connector_saturation: float = 0.5
    cc_paragraph_bonus: float = 1.0
    cc_paragraph_range: tuple[int, int] = (3, 5)
    cc_sentence_length_bonus: float = 0.5
    cc_sentence_length_range: tuple[float, float] = (12.0, 25.0)

    @classmethod
    def from_file(cls, path: str | Path) -> "RuleScorerConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        for key in ("gra_table",):
            if key in raw:
                raw[key] = tuple(tuple(row) for row in raw[key])
        for key in ("cc_paragraph_range", "cc_sentence_length_range"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_file(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2)


DEFAULT_CONFIG = RuleScorerConfig()

_STEM_SUFFIXES = ("ion", "ing", "ed", "es", "ly", "s")


def stem(word: str) -> str:
    """Crude suffix-stripping stem; enough for prompt-keyword matching."""
    w = word.lower()
    for suffix in _STEM_SUFFIXES:
        if w.endswith(suffix) and len(w) - len(suffix) >= 3:
            w = w[: -len(suffix)]
            break
    if w.endswith("i"):
        return w[:-1] + "y"
    if w.endswith("e"):
        return w[:-1]
    return w


def keyword_coverage(essay: TokenizedEssay, keywords: tuple[str, ...]) -> float:
    """Fraction of prompt keywords whose stem appears in the essay.

    With no declared keywords there is no prompt-relevance signal and
    coverage defaults to full.
    """
    if not keywords:
        return 1.0
    essay_stems = {stem(w) for w in essay.words}
    return sum(1 for k in keywords if stem(k) in essay_stems) / len(keywords)


def score_ta(
    features: FeatureVector,
    essay: TokenizedEssay,
    task: TaskSpec,
    config: RuleScorerConfig = DEFAULT_CONFIG,
) -> float:
    coverage = keyword_coverage(essay, task.prompt_keywords)
    base = config.ta_floor + (config.ta_ceiling - config.ta_floor) * coverage
    if config.word_count_scaling:
        base *= min(1.0, features.word_count / task.required_word_count)
    return clamp_band(base)


def score_gra(features: FeatureVector, config: RuleScorerConfig = DEFAULT_CONFIG) -> float:
    density = features.grammar_error_density
    for max_density, band in config.gra_table:
        if density <= max_density:
            return band
    return config.gra_fallback


def score_lr(features: FeatureVector, config: RuleScorerConfig = DEFAULT_CONFIG) -> float:
    blend = (
        config.lr_sophistication_weight * features.sophistication_ratio
        + config.lr_diversity_weight * features.lexical_diversity
    )
    score = config.lr_floor + (config.lr_ceiling - config.lr_floor) * (
        blend / config.lr_blend_max
    )
    return clamp_band(score)


def score_cc(features: FeatureVector, config: RuleScorerConfig = DEFAULT_CONFIG) -> float:
    score = config.cc_base
    score += config.cc_connector_bonus * min(
        1.0, features.connector_density / config.cc_connector_saturation
    )
    lo, hi = config.cc_paragraph_range
    if lo <= features.paragraph_count <= hi:
        score += config.cc_paragraph_bonus
    lo, hi = config.cc_sentence_length_range
    if lo <= features.mean_sentence_length <= hi:
        score += config.cc_sentence_length_bonus
    return clamp_band(score)


def score_rubric(
    features: FeatureVector,
    essay: TokenizedEssay,
    task: TaskSpec,
    config: RuleScorerConfig = DEFAULT_CONFIG,
) -> RubricScores:
    return make_rubric_scores(
        ta=score_ta(features, essay, task, config),
        cc=score_cc(features, config),
        lr=score_lr(features, config),
        gra=score_gra(features, config),
    )


def score_overall(
    text: str,
    task: TaskSpec,
    lexicon: frozenset[str],
    backend,
    config: RuleScorerConfig = DEFAULT_CONFIG,
    connectors=None,
) -> RubricScores:
    """Full pipeline: tokenize, extract features, score all four criteria."""
    tokenized = tokenize(text)
    issues = backend.check(text)
    features = build_features(text, tokenized, len(issues), lexicon, connectors)
    return score_rubric(features, tokenized, task, config)
