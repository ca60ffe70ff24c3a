import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ieltsprep.corpus import round_to_band
from ieltsprep.metrics import (
    MetricsError,
    compute_metrics,
    confusion,
    paired_tests,
    wilcoxon_signed_rank,
)


# ---------------------------------------------------------------------------
# Independent brute-force references (kept deliberately naive).

def ref_mean(xs):
    return sum(xs) / len(xs)


def ref_mae(preds, labels):
    return ref_mean([abs(p - y) for p, y in zip(preds, labels)])


def ref_r2(preds, labels):
    mu = ref_mean(labels)
    ss_res = sum((y - p) ** 2 for p, y in zip(preds, labels))
    ss_tot = sum((y - mu) ** 2 for y in labels)
    return 1 - ss_res / ss_tot


def ref_pearson(xs, ys):
    mx, my = ref_mean(xs), ref_mean(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = math.sqrt(sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys))
    return num / den


def ref_ranks(xs):
    ranks = [0.0] * len(xs)
    for i, x in enumerate(xs):
        less = sum(1 for v in xs if v < x)
        equal = sum(1 for v in xs if v == x)
        ranks[i] = less + (equal + 1) / 2
    return ranks


def ref_spearman(xs, ys):
    return ref_pearson(ref_ranks(xs), ref_ranks(ys))


def ref_band_pcts(preds, labels):
    pb = [round_to_band(p) for p in preds]
    lb = [round_to_band(y) for y in labels]
    gaps = [abs(p - y) for p, y in zip(pb, lb)]
    n = len(gaps)
    return (
        100 * sum(1 for g in gaps if g < 1e-9) / n,
        100 * sum(1 for g in gaps if g <= 0.5 + 1e-9) / n,
        100 * sum(1 for g in gaps if g <= 1.0 + 1e-9) / n,
    )


def ref_wilcoxon_exact(diffs):
    """Enumerate every sign pattern of the nonzero differences."""
    nonzero = [d for d in diffs if d != 0]
    m = len(nonzero)
    ranks = ref_ranks([abs(d) for d in nonzero])
    observed = sum(r for d, r in zip(nonzero, ranks) if d > 0)
    mu = sum(ranks) / 2
    count = 0
    for signs in itertools.product((0, 1), repeat=m):
        w = sum(r for s, r in zip(signs, ranks) if s)
        if abs(w - mu) >= abs(observed - mu) - 1e-9:
            count += 1
    return count / 2**m


# ---------------------------------------------------------------------------

class TestComputeMetrics:
    def test_perfect_predictor(self):
        labels = [5.0, 6.0, 7.5, 8.0]
        report = compute_metrics(labels, labels)
        assert report.mae == 0.0
        assert report.r2 == 1.0
        assert report.pearson_r == pytest.approx(1.0)
        assert report.spearman_rho == pytest.approx(1.0)
        assert report.exact_pct == report.within05_pct == report.within10_pct == 100.0

    def test_mean_predictor_r2_zero(self):
        labels = [5.0, 6.0, 7.0, 8.0]
        preds = [6.5] * 4
        with pytest.raises(MetricsError):
            # constant preds: pearson undefined
            compute_metrics(preds, labels)
        # R^2 definition checked on nearly-constant preds via reference
        assert ref_r2(preds, labels) == pytest.approx(0.0)

    def test_three_pair_oracle(self):
        preds, labels = [5.0, 6.0, 7.0], [5.5, 6.5, 6.5]
        report = compute_metrics(preds, labels)
        exact, within05, within10 = ref_band_pcts(preds, labels)
        assert report.mae == pytest.approx(0.5)
        assert report.within05_pct == pytest.approx(within05) == 100.0
        assert report.exact_pct == pytest.approx(exact)

    def test_zero_label_variance(self):
        with pytest.raises(MetricsError):
            compute_metrics([5.0, 6.0], [6.0, 6.0])

    def test_invariant_ordering(self):
        rng = np.random.default_rng(0)
        labels = rng.uniform(1, 9, 40)
        preds = labels + rng.normal(0, 1, 40)
        report = compute_metrics(preds, labels)
        assert report.exact_pct <= report.within05_pct <= report.within10_pct

    @given(
        st.integers(min_value=2, max_value=60),
        st.integers(min_value=0, max_value=10**6),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_bruteforce(self, n, seed):
        rng = np.random.default_rng(seed)
        labels = rng.uniform(1, 9, n)
        preds = rng.uniform(0, 10, n)
        if np.var(labels) == 0 or np.var(preds) == 0:
            return
        report = compute_metrics(preds, labels)
        assert report.mae == pytest.approx(ref_mae(preds, labels), abs=1e-9)
        assert report.r2 == pytest.approx(ref_r2(preds, labels), abs=1e-9)
        assert report.pearson_r == pytest.approx(ref_pearson(preds, labels), abs=1e-9)
        assert report.spearman_rho == pytest.approx(ref_spearman(preds, labels), abs=1e-9)

    @given(
        st.integers(min_value=3, max_value=40),
        st.integers(min_value=0, max_value=10**6),
        st.floats(min_value=0.1, max_value=5),
        st.floats(min_value=-10, max_value=10),
    )
    @settings(max_examples=40, deadline=None)
    def test_pearson_affine_invariance(self, n, seed, a, b):
        rng = np.random.default_rng(seed)
        x = rng.uniform(1, 9, n)
        y = rng.uniform(1, 9, n)
        if np.var(x) == 0 or np.var(y) == 0:
            return
        base = compute_metrics(x, y).pearson_r
        transformed = compute_metrics(a * x + b, y).pearson_r
        assert transformed == pytest.approx(base, abs=1e-9)

    @given(st.integers(min_value=3, max_value=40), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=40, deadline=None)
    def test_spearman_monotone_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(1, 9, n)
        y = rng.uniform(1, 9, n)
        if np.var(x) == 0 or np.var(y) == 0:
            return
        base = compute_metrics(x, y).spearman_rho
        transformed = compute_metrics(np.exp(x), y).spearman_rho
        assert transformed == pytest.approx(base, abs=1e-9)


class TestPairedTests:
    def test_zero_variance_diffs(self):
        with pytest.raises(MetricsError, match="zero-variance"):
            paired_tests([5.0, 6.0, 7.0], [5.0, 6.0, 7.0])

    def test_sign_consistency(self):
        rng = np.random.default_rng(1)
        before = rng.uniform(5, 7, 20)
        after = before + rng.normal(0.2, 0.3, 20)
        report = paired_tests(before, after)
        assert (report.mean_delta > 0) == (report.t_stat > 0)
        assert report.pct_improved + report.pct_worsened + report.pct_unchanged == pytest.approx(100.0)

    def test_reorder_invariance(self):
        rng = np.random.default_rng(2)
        before = rng.uniform(5, 7, 15)
        after = before + rng.normal(0, 0.4, 15)
        a = paired_tests(before, after)
        order = rng.permutation(15)
        b = paired_tests(before[order], after[order])
        assert a.t_stat == pytest.approx(b.t_stat, abs=1e-12)
        assert a.p_wilcoxon == pytest.approx(b.p_wilcoxon, abs=1e-12)

    def test_textbook_eight_pair_wilcoxon(self):
        # classic paired example; exact p must equal full enumeration
        before = [7.0, 6.0, 8.0, 5.0, 7.0, 6.0, 9.0, 8.0]
        after = [9.0, 7.0, 8.5, 6.0, 10.0, 8.0, 10.0, 9.0]
        diffs = [a - b for a, b in zip(after, before)]
        report = paired_tests(before, after)
        assert report.p_wilcoxon == pytest.approx(ref_wilcoxon_exact(diffs), abs=1e-12)

    @given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=4, max_value=12))
    @settings(max_examples=40, deadline=None)
    def test_exact_wilcoxon_matches_enumeration(self, seed, n):
        rng = np.random.default_rng(seed)
        diffs = np.round(rng.normal(0.1, 0.5, n), 1)
        if np.all(diffs == 0):
            return
        assert wilcoxon_signed_rank(diffs) == pytest.approx(ref_wilcoxon_exact(list(diffs)), abs=1e-12)

    def test_zero_diffs_dropped(self):
        diffs = np.array([0.0, 0.0, 0.5, -0.2, 0.8, 0.3])
        assert wilcoxon_signed_rank(diffs) == pytest.approx(
            ref_wilcoxon_exact([0.5, -0.2, 0.8, 0.3]), abs=1e-12
        )


class TestConfusion:
    def test_diagonal_for_lattice_inputs(self):
        values = [5.0, 6.5, 7.0, 6.5]
        matrix = confusion(values, values)
        assert matrix.total == 4
        for i, row in enumerate(matrix.counts):
            for j, count in enumerate(row):
                if count:
                    assert i == j

    def test_rounding_rule(self):
        matrix = confusion([6.2], [6.5])
        i_pred = matrix.bins.index(6.0)
        i_actual = matrix.bins.index(6.5)
        assert matrix.counts[i_pred][i_actual] == 1

    def test_empty_inputs(self):
        with pytest.raises(MetricsError):
            confusion([], [])
