"""Training loop for the hybrid scorer.

AdamW with decoupled weight decay, gradient accumulation for the
effective batch size, Gaussian target jitter on the labels each epoch,
partial encoder freezing, and early stopping on validation MAE.
"""

from __future__ import annotations

import copy
import math

import numpy as np
import torch

from ..features import build_features, load_connectors, tokenize
from .encoder import EncoderConfig
from .model import (
    EpochRecord,
    HybridScorer,
    ModelArtifact,
    ModelError,
    TrainConfig,
    TrainingHistory,
)


def _prepare(records, model: HybridScorer, enc_cfg, lexicon, backend, connectors):
    ids, masks, feats, labels = [], [], [], []
    for record in records:
        if record.label is None:
            raise ModelError(f"essay {record.id!r} has no label; training needs labeled records")
        tokenized = tokenize(record.body)
        issues = backend.check(record.body)
        fv = build_features(record.body, tokenized, len(issues), lexicon, connectors)
        token_ids, mask = model.tokenizer.encode(record.body, enc_cfg.max_tokens)
        ids.append(token_ids)
        masks.append(mask)
        feats.append(fv.as_list())
        labels.append(record.label)
    return (
        torch.tensor(ids, dtype=torch.long),
        torch.tensor(masks, dtype=torch.long),
        np.asarray(feats, dtype=np.float64),
        torch.tensor(labels, dtype=torch.float32),
    )


@torch.no_grad()
def _mae(model, ids, masks, feats, labels, micro_batch) -> float:
    model.eval()
    total = 0.0
    for start in range(0, len(labels), micro_batch):
        sl = slice(start, start + micro_batch)
        preds = model(ids[sl], masks[sl], feats[sl])
        total += float(torch.abs(preds - labels[sl]).sum())
    return total / len(labels)


def train(
    train_records,
    val_records,
    enc_cfg: EncoderConfig,
    cfg: TrainConfig,
    lexicon: frozenset[str],
    backend,
    connectors=None,
    lexicon_top_k: int = 2000,
) -> tuple[ModelArtifact, TrainingHistory]:
    if not train_records or not val_records:
        raise ModelError("train and val sets must be nonempty")
    overlap = {r.id for r in train_records} & {r.id for r in val_records}
    if overlap:
        raise ModelError(f"train/val sets overlap: {sorted(overlap)[:5]}")
    if connectors is None:
        connectors = load_connectors()

    torch.manual_seed(cfg.seed)
    model = HybridScorer(enc_cfg, cfg.dropout)

    train_ids, train_masks, train_feats_raw, train_labels = _prepare(
        train_records, model, enc_cfg, lexicon, backend, connectors
    )
    val_ids, val_masks, val_feats_raw, val_labels = _prepare(
        val_records, model, enc_cfg, lexicon, backend, connectors
    )

    # Normalization statistics come only from the training split.
    feature_mean = train_feats_raw.mean(axis=0)
    feature_std = train_feats_raw.std(axis=0)
    feature_std[feature_std == 0.0] = 1.0
    train_feats = torch.tensor((train_feats_raw - feature_mean) / feature_std, dtype=torch.float32)
    val_feats = torch.tensor((val_feats_raw - feature_mean) / feature_std, dtype=torch.float32)

    for param in model.encoder.bottom_parameters(enc_cfg.frozen_layer_count):
        param.requires_grad_(False)
    optimizer = torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad],
        lr=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
    )

    n = len(train_records)
    best_state = copy.deepcopy(model.state_dict())
    best_val = _mae(model, val_ids, val_masks, val_feats, val_labels, cfg.micro_batch)
    best_epoch = 0
    epochs_without_improvement = 0
    records = []
    stopped_early = False

    for epoch in range(1, cfg.max_epochs + 1):
        generator = torch.Generator().manual_seed(cfg.seed * 1_000_003 + epoch)
        order = torch.randperm(n, generator=generator)
        if cfg.target_jitter_sigma > 0:
            jitter = torch.randn(n, generator=generator) * cfg.target_jitter_sigma
        else:
            jitter = torch.zeros(n)
        targets = train_labels + jitter

        model.train()
        optimizer.zero_grad()
        abs_err_sum = 0.0
        micro_steps = math.ceil(n / cfg.micro_batch)
        for step in range(micro_steps):
            batch = order[step * cfg.micro_batch : (step + 1) * cfg.micro_batch]
            preds = model(train_ids[batch], train_masks[batch], train_feats[batch])
            loss = torch.mean((preds - targets[batch]) ** 2) / cfg.grad_accum_steps
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, step {step}: {float(loss)}"
                )
            loss.backward()
            abs_err_sum += float(torch.abs(preds.detach() - train_labels[batch]).sum())
            if (step + 1) % cfg.grad_accum_steps == 0 or step == micro_steps - 1:
                optimizer.step()
                optimizer.zero_grad()

        train_mae = abs_err_sum / n
        val_mae = _mae(model, val_ids, val_masks, val_feats, val_labels, cfg.micro_batch)
        improved = val_mae < best_val
        records.append(EpochRecord(epoch=epoch, train_mae=train_mae, val_mae=val_mae, improved=improved))
        if improved:
            best_val = val_mae
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= cfg.patience:
                stopped_early = True
                break

    history = TrainingHistory(epochs=tuple(records), best_epoch=best_epoch, stopped_early=stopped_early)
    artifact = ModelArtifact(
        enc_config=enc_cfg,
        train_config=cfg,
        state_dict=best_state,
        feature_mean=feature_mean,
        feature_std=feature_std,
        best_val_mae=best_val,
        dataset_ids={
            "train": [r.id for r in train_records],
            "val": [r.id for r in val_records],
        },
        lexicon_top_k=lexicon_top_k,
    )
    return artifact, history
