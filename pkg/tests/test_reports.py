import json
import random

import pytest

from ieltsprep.metrics import compute_metrics, confusion, paired_tests
from ieltsprep.reports import compare_runs, render_report


@pytest.fixture(scope="module")
def sample():
    rng = random.Random(5)
    labels = [round(rng.uniform(4, 9) * 2) / 2 for _ in range(40)]
    preds = [label + rng.gauss(0, 0.6) for label in labels]
    return preds, labels


def test_json_is_canonical_and_deterministic(tmp_path, sample):
    preds, labels = sample
    metrics = compute_metrics(preds, labels)
    matrix = confusion(preds, labels)
    p1 = render_report(tmp_path / "a", metrics=metrics, matrix=matrix,
                       preds=preds, labels=labels)
    p2 = render_report(tmp_path / "b", metrics=metrics, matrix=matrix,
                       preds=preds, labels=labels)
    assert p1.read_text() == p2.read_text()
    payload = json.loads(p1.read_text())
    for key in ("mae", "r2", "exact_pct", "within05_pct", "within10_pct"):
        assert key in payload["metrics"]
    assert payload["metrics"]["mae"] == metrics.mae


def test_stats_json_includes_mean_delta_marker(tmp_path):
    rng = random.Random(9)
    before = [rng.uniform(4, 8) for _ in range(30)]
    after = [b + rng.gauss(0.06, 0.12) for b in before]
    stats = paired_tests(before, after)
    path = render_report(tmp_path, stats=stats,
                         deltas=[a - b for a, b in zip(after, before)],
                         plots=("histogram",))
    payload = json.loads(path.read_text())
    assert payload["stats"]["mean_delta_marker"] == stats.mean_delta
    assert (tmp_path / "histogram.png").exists()


def test_all_plot_files_written(tmp_path, sample):
    preds, labels = sample
    metrics = compute_metrics(preds, labels)
    matrix = confusion(preds, labels)
    render_report(tmp_path, metrics=metrics, matrix=matrix,
                  preds=preds, labels=labels,
                  deltas=[p - l for p, l in zip(preds, labels)])
    for kind in ("scatter", "box", "histogram", "residual", "confusion"):
        assert (tmp_path / f"{kind}.png").stat().st_size > 0


def test_compare_runs_deltas(tmp_path, sample):
    preds, labels = sample
    m1 = compute_metrics(preds, labels)
    m2 = compute_metrics([p * 0.9 + 0.6 for p in preds], labels)
    render_report(tmp_path / "run1", metrics=m1, plots=())
    render_report(tmp_path / "run2", metrics=m2, plots=())
    result = compare_runs([tmp_path / "run1", tmp_path / "run2"])
    assert result["delta"]["mae"] == pytest.approx(m2.mae - m1.mae)
