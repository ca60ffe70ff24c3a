"""Benchmarking metrics and paired statistical tests.

Band-accuracy percentages compare rounded bands; MAE, R², and the
correlations use raw values. The Wilcoxon test drops zero differences,
mid-ranks ties, and switches from exact enumeration to a normal
approximation with continuity correction above 25 effective pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import stats as _scipy_stats

from .corpus import round_to_band

BAND_BINS = tuple(x / 2.0 for x in range(2, 19))  # 1.0 .. 9.0 step 0.5

_EPS = 1e-9


class MetricsError(ValueError):
    """Raised for degenerate metric inputs (zero variance, empty data)."""


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    r2: float
    pearson_r: float
    spearman_rho: float
    exact_pct: float
    within05_pct: float
    within10_pct: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StatsReport:
    n_pairs: int
    mean_before: float
    sd_before: float
    mean_after: float
    sd_after: float
    mean_delta: float
    pct_improved: float
    pct_worsened: float
    pct_unchanged: float
    t_stat: float
    p_t: float
    p_wilcoxon: float
    cohens_d_paired: float
    alpha: float = 0.05

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConfusionMatrix:
    bins: tuple[float, ...]
    counts: tuple[tuple[int, ...], ...]  # counts[predicted_bin][actual_bin]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def to_dict(self) -> dict:
        return {"bins": list(self.bins), "counts": [list(r) for r in self.counts]}


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xd = x - x.mean()
    yd = y - y.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        raise MetricsError("correlation undefined: zero variance")
    return float(xd @ yd) / denom


def compute_metrics(preds, labels) -> MetricsReport:
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.shape != labels.shape or preds.ndim != 1 or preds.size == 0:
        raise MetricsError("preds and labels must be equal-length nonempty vectors")
    n = preds.size
    mae = float(np.abs(preds - labels).mean())
    ss_tot = float(((labels - labels.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise MetricsError("R^2 undefined: zero variance in labels")
    ss_res = float(((labels - preds) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    pearson = _pearson(preds, labels)
    spearman = _pearson(
        _scipy_stats.rankdata(preds, method="average"),
        _scipy_stats.rankdata(labels, method="average"),
    )
    pred_bands = np.array([round_to_band(p) for p in preds])
    label_bands = np.array([round_to_band(y) for y in labels])
    gaps = np.abs(pred_bands - label_bands)
    return MetricsReport(
        mae=mae,
        r2=r2,
        pearson_r=pearson,
        spearman_rho=spearman,
        exact_pct=100.0 * float(np.mean(gaps < _EPS)),
        within05_pct=100.0 * float(np.mean(gaps <= 0.5 + _EPS)),
        within10_pct=100.0 * float(np.mean(gaps <= 1.0 + _EPS)),
        n=int(n),
    )


def _wilcoxon_exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Exact two-sided p over all sign assignments of tie-averaged ranks.

    Doubled ranks are integers, so the null distribution of 2*W+ is
    computed by integer dynamic programming.
    """
    doubled = np.rint(ranks * 2).astype(int)
    total = int(doubled.sum())
    table = np.zeros(total + 1, dtype=float)
    table[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(table)
        shifted[r:] = table[: total + 1 - r]
        table = table + shifted
    table /= table.sum()
    w2 = int(round(w_plus * 2))
    mu2 = total / 2.0
    deviation = abs(w2 - mu2)
    support = np.arange(total + 1)
    p = float(table[np.abs(support - mu2) >= deviation - _EPS].sum())
    return min(1.0, p)


def wilcoxon_signed_rank(diffs: np.ndarray) -> float:
    """Two-sided p-value; zeros dropped, ties mid-ranked.

    Exact enumeration for up to 25 effective pairs, otherwise a normal
    approximation with continuity and tie corrections.
    """
    nonzero = diffs[diffs != 0]
    m = nonzero.size
    if m == 0:
        return 1.0
    ranks = _scipy_stats.rankdata(np.abs(nonzero), method="average")
    w_plus = float(ranks[nonzero > 0].sum())
    if m <= 25:
        return _wilcoxon_exact_p(ranks, w_plus)
    mu = m * (m + 1) / 4.0
    sigma_sq = m * (m + 1) * (2 * m + 1) / 24.0
    _, tie_counts = np.unique(np.abs(nonzero), return_counts=True)
    sigma_sq -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    sigma = math.sqrt(sigma_sq)
    if sigma == 0.0:
        return 1.0
    # continuity correction toward the mean
    z = (w_plus - mu - 0.5 * math.copysign(1.0, w_plus - mu)) / sigma if w_plus != mu else 0.0
    return float(2.0 * _scipy_stats.norm.sf(abs(z)))


def paired_tests(before, after) -> StatsReport:
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    if before.shape != after.shape or before.ndim != 1 or before.size < 2:
        raise MetricsError("need two equal-length vectors with n >= 2")
    n = before.size
    diffs = after - before
    sd_diff = float(diffs.std(ddof=1))
    if sd_diff == 0.0:
        raise MetricsError("zero-variance differences: t and d undefined")
    mean_delta = float(diffs.mean())
    t_stat = mean_delta / (sd_diff / math.sqrt(n))
    p_t = float(2.0 * _scipy_stats.t.sf(abs(t_stat), df=n - 1))
    return StatsReport(
        n_pairs=int(n),
        mean_before=float(before.mean()),
        sd_before=float(before.std(ddof=1)),
        mean_after=float(after.mean()),
        sd_after=float(after.std(ddof=1)),
        mean_delta=mean_delta,
        pct_improved=100.0 * float(np.mean(diffs > 0)),
        pct_worsened=100.0 * float(np.mean(diffs < 0)),
        pct_unchanged=100.0 * float(np.mean(diffs == 0)),
        t_stat=float(t_stat),
        p_t=p_t,
        p_wilcoxon=wilcoxon_signed_rank(diffs),
        cohens_d_paired=mean_delta / sd_diff,
    )


def confusion(preds, labels) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.shape != labels.shape or preds.ndim != 1 or preds.size == 0:
        raise MetricsError("preds and labels must be equal-length nonempty vectors")
    index = {band: i for i, band in enumerate(BAND_BINS)}
    counts = [[0] * len(BAND_BINS) for _ in BAND_BINS]
    for p, y in zip(preds, labels):
        counts[index[round_to_band(p)]][index[round_to_band(y)]] += 1
    return ConfusionMatrix(bins=BAND_BINS, counts=tuple(tuple(r) for r in counts))
