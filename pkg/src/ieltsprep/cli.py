"""Command line interface: dataset checks, training, scoring, benchmarks,
persona simulation, and the HTTP service."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .corpus import CorpusError, load_dataset
from .features import load_connectors, load_frequency_lexicon
from .grammar import make_backend
from .metrics import compute_metrics, confusion, paired_tests
from .neural import EncoderConfig, ModelArtifact, TrainConfig, predict_batch
from .personas import ExperimentSpec, run_experiment, write_experiment_outputs
from .reports import compare_runs, render_report
from .rule_scorer import RuleScorerConfig, DEFAULT_CONFIG, TaskSpec, score_overall


@click.group()
def main():
    """Essay scoring, feedback, and revision-experiment toolkit."""


@main.group()
def dataset():
    """Dataset inspection commands."""


@dataset.command("validate")
@click.argument("path", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default=None,
              help="Inferred from the extension when omitted.")
def dataset_validate(path, fmt):
    """Check every row against the essay record invariants."""
    try:
        records = load_dataset(path, fmt)
    except CorpusError as exc:
        click.echo(f"INVALID: {exc}", err=True)
        sys.exit(1)
    labelled = sum(1 for r in records if r.label is not None)
    click.echo(f"OK: {len(records)} records ({labelled} labelled)")


def _load_train_config(path):
    raw = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    enc_fields = {f for f in EncoderConfig.__dataclass_fields__}
    train_fields = {f for f in TrainConfig.__dataclass_fields__}
    unknown = set(raw) - enc_fields - train_fields
    if unknown:
        raise click.ClickException(f"unknown config keys: {sorted(unknown)}")
    enc = EncoderConfig(**{k: v for k, v in raw.items() if k in enc_fields})
    cfg = TrainConfig(**{k: v for k, v in raw.items() if k in train_fields})
    return enc, cfg


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file with encoder and training fields.")
@click.option("--out", required=True, type=click.Path())
@click.option("--val-frac", default=0.15, show_default=True)
@click.option("--grammar-backend", default="builtin", show_default=True)
def train(data, config_path, out, val_frac, grammar_backend):
    """Train the hybrid scorer and save the model artifact."""
    import random

    from .neural import train as train_model

    records = load_dataset(data)
    unlabelled = [r.id for r in records if r.label is None]
    if unlabelled:
        raise click.ClickException(f"unlabelled records: {unlabelled[:5]}")
    enc, cfg = _load_train_config(config_path)
    shuffled = list(records)
    random.Random(cfg.seed).shuffle(shuffled)
    n_val = max(1, int(round(val_frac * len(shuffled))))
    val_records, train_records = shuffled[:n_val], shuffled[n_val:]
    lexicon = load_frequency_lexicon()
    backend = make_backend(grammar_backend)
    artifact, history = train_model(train_records, val_records, enc, cfg, lexicon, backend)
    artifact.save(out)
    click.echo(f"saved {out} (best val MAE {history.best_val_mae:.4f}, "
               f"{len(history.epochs)} epochs)")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--grammar-backend", default="builtin", show_default=True)
def score(model_path, in_path, out_path, grammar_backend):
    """Score a CSV of essays; writes id, raw_score, band."""
    records = load_dataset(in_path)
    artifact = ModelArtifact.load(model_path)
    lexicon = load_frequency_lexicon()
    backend = make_backend(grammar_backend)
    connectors = load_connectors()
    rows = predict_batch(artifact, records, lexicon, backend, connectors)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "raw_score", "band"])
        for record, (raw, band) in zip(records, rows):
            writer.writerow([record.id, repr(raw), band])
    click.echo(f"scored {len(records)} essays -> {out_path}")


@main.command()
@click.option("--scorer", type=click.Choice(["rule", "neural"]), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--rule-config", type=click.Path(exists=True), default=None)
@click.option("--grammar-backend", default="builtin", show_default=True)
def benchmark(scorer, model_path, data, out_dir, rule_config, grammar_backend):
    """Evaluate a scorer on labelled data; writes report.json and plots."""
    records = load_dataset(data)
    labels = [r.label for r in records]
    if any(label is None for label in labels):
        raise click.ClickException("benchmark data must be fully labelled")
    lexicon = load_frequency_lexicon()
    backend = make_backend(grammar_backend)
    if scorer == "neural":
        if not model_path:
            raise click.ClickException("--model is required with --scorer neural")
        artifact = ModelArtifact.load(model_path)
        preds = [raw for raw, _ in predict_batch(artifact, records, lexicon, backend)]
    else:
        config = RuleScorerConfig.from_file(rule_config) if rule_config else DEFAULT_CONFIG
        task = TaskSpec()
        preds = [
            score_overall(r.body, task, lexicon, backend, config).overall for r in records
        ]
    metrics = compute_metrics(preds, labels)
    matrix = confusion(preds, labels)
    path = render_report(out_dir, metrics=metrics, matrix=matrix, preds=preds, labels=labels)
    click.echo(f"wrote {path} (MAE {metrics.mae:.4f}, R2 {metrics.r2:.4f})")


@main.command()
@click.option("--runs", "run_dirs", multiple=True, required=True,
              type=click.Path(exists=True))
def compare(run_dirs):
    """Print metric deltas between benchmark run directories."""
    click.echo(json.dumps(compare_runs(run_dirs), indent=2, sort_keys=True))


@main.command("simulate-personas")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--essays", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--grammar-backend", default="builtin", show_default=True)
def simulate_personas(model_path, essays, seed, out_dir, grammar_backend):
    """Run the persona revision experiment and write its reports."""
    records = load_dataset(essays)
    spec = ExperimentSpec(essays=tuple(records), seed=seed)
    artifact = ModelArtifact.load(model_path)
    lexicon = load_frequency_lexicon()
    backend = make_backend(grammar_backend)
    results, stats, table = run_experiment(spec, artifact, lexicon, backend)
    write_experiment_outputs(out_dir, results, stats, table)
    click.echo(f"mean delta {stats.mean_delta:+.5f}, "
               f"{stats.pct_improved:.1f}% improved, p_t {stats.p_t:.5f}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--store", "store_path", default=":memory:", show_default=True)
@click.option("--grammar-backend", default="builtin", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(model_path, store_path, grammar_backend, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        model_path=model_path, grammar_backend=grammar_backend,
        store_path=store_path, host=host, port=port,
    )
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
