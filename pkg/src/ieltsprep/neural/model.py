"""Hybrid scoring model: pooled encoder states fused with linguistic features."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..corpus import clamp_band, round_to_band
from ..features import FeatureVector, build_features, load_connectors, tokenize
from .encoder import EncoderConfig, build_encoder, masked_mean_pool

N_FEATURES = len(FeatureVector.FIELD_ORDER)


class ModelError(ValueError):
    """Raised for invalid model inputs (shape mismatches, bad artifacts)."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.5e-5
    weight_decay: float = 0.02
    dropout: float = 0.35
    target_jitter_sigma: float = 0.05
    grad_accum_steps: int = 4
    micro_batch: int = 8
    max_epochs: int = 30
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0 or self.weight_decay < 0 or self.target_jitter_sigma < 0:
            raise ModelError("learning_rate, weight_decay, target_jitter_sigma must be >= 0")
        if not (0.0 <= self.dropout < 1.0):
            raise ModelError("dropout must be in [0, 1)")
        if self.grad_accum_steps < 1 or self.micro_batch < 1:
            raise ModelError("grad_accum_steps and micro_batch must be >= 1")
        if self.max_epochs < 1 or self.patience < 1:
            raise ModelError("max_epochs and patience must be >= 1")


@dataclass(frozen=True)
class HybridInput:
    token_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    normalized_features: tuple[float, ...]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_mae: float
    val_mae: float
    improved: bool


@dataclass(frozen=True)
class TrainingHistory:
    epochs: tuple[EpochRecord, ...]
    best_epoch: int
    stopped_early: bool

    @property
    def best_val_mae(self) -> float:
        return min(r.val_mae for r in self.epochs)


class HybridScorer(nn.Module):
    def __init__(self, enc_config: EncoderConfig, dropout: float):
        super().__init__()
        self.encoder, self.tokenizer = build_encoder(enc_config)
        self.dropout = nn.Dropout(dropout)
        self.head = nn.Linear(self.encoder.hidden_dim + N_FEATURES, 1)

    def forward(
        self,
        token_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        normalized_features: torch.Tensor,
    ) -> torch.Tensor:
        if normalized_features.shape[-1] != N_FEATURES:
            raise ModelError(
                f"feature length {normalized_features.shape[-1]} != expected {N_FEATURES}"
            )
        pooled = masked_mean_pool(self.encoder(token_ids, attention_mask), attention_mask)
        combined = torch.cat([pooled, normalized_features], dim=-1)
        return self.head(self.dropout(combined)).squeeze(-1)


class ModelArtifact:
    """Self-describing checkpoint: weights, train-split feature statistics,
    config snapshot, and the dataset-id audit trail."""

    def __init__(
        self,
        enc_config: EncoderConfig,
        train_config: TrainConfig,
        state_dict: dict,
        feature_mean: np.ndarray,
        feature_std: np.ndarray,
        best_val_mae: float,
        dataset_ids: dict[str, list[str]] | None = None,
        lexicon_top_k: int = 2000,
    ):
        self.enc_config = enc_config
        self.train_config = train_config
        self.feature_mean = np.asarray(feature_mean, dtype=np.float64)
        self.feature_std = np.asarray(feature_std, dtype=np.float64)
        self.best_val_mae = best_val_mae
        self.dataset_ids = dataset_ids or {}
        self.lexicon_top_k = lexicon_top_k
        self.model = HybridScorer(enc_config, train_config.dropout)
        self.model.load_state_dict(state_dict)
        self.model.eval()

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        torch.save(
            {
                "format": "ieltsprep-hybrid-v1",
                "enc_config": asdict(self.enc_config),
                "train_config": asdict(self.train_config),
                "state_dict": self.model.state_dict(),
                "feature_mean": self.feature_mean,
                "feature_std": self.feature_std,
                "best_val_mae": self.best_val_mae,
                "dataset_ids": self.dataset_ids,
                "lexicon_top_k": self.lexicon_top_k,
            },
            path,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ModelArtifact":
        blob = torch.load(path, map_location="cpu", weights_only=False)
        if blob.get("format") != "ieltsprep-hybrid-v1":
            raise ModelError(f"not a model artifact: {path}")
        return cls(
            enc_config=EncoderConfig(**blob["enc_config"]),
            train_config=TrainConfig(**blob["train_config"]),
            state_dict=blob["state_dict"],
            feature_mean=blob["feature_mean"],
            feature_std=blob["feature_std"],
            best_val_mae=blob["best_val_mae"],
            dataset_ids=blob.get("dataset_ids", {}),
            lexicon_top_k=blob.get("lexicon_top_k", 2000),
        )

    def weights_hash(self) -> str:
        digest = hashlib.sha256()
        for name in sorted(self.model.state_dict()):
            tensor = self.model.state_dict()[name]
            digest.update(name.encode())
            digest.update(tensor.detach().cpu().numpy().tobytes())
        digest.update(self.feature_mean.tobytes())
        digest.update(self.feature_std.tobytes())
        return digest.hexdigest()

    # -- inference ----------------------------------------------------------

    def normalize_features(self, raw: np.ndarray) -> np.ndarray:
        if raw.shape[-1] != self.feature_mean.shape[0]:
            raise ModelError(
                f"feature length {raw.shape[-1]} does not match artifact "
                f"statistics ({self.feature_mean.shape[0]})"
            )
        return (raw - self.feature_mean) / self.feature_std

    def make_input(self, text: str, features: FeatureVector) -> HybridInput:
        ids, mask = self.model.tokenizer.encode(text, self.enc_config.max_tokens)
        normalized = self.normalize_features(np.asarray(features.as_list()))
        return HybridInput(tuple(ids), tuple(mask), tuple(float(x) for x in normalized))

    @torch.no_grad()
    def forward_inputs(self, inputs: list[HybridInput]) -> list[float]:
        self.model.eval()
        ids = torch.tensor([i.token_ids for i in inputs], dtype=torch.long)
        mask = torch.tensor([i.attention_mask for i in inputs], dtype=torch.long)
        feats = torch.tensor([i.normalized_features for i in inputs], dtype=torch.float32)
        return [float(x) for x in self.model(ids, mask, feats)]


def forward(artifact: ModelArtifact, hybrid_input: HybridInput) -> float:
    """Raw (unclamped) band prediction for one prepared input."""
    return artifact.forward_inputs([hybrid_input])[0]


def reported_band(raw: float) -> float:
    return round_to_band(clamp_band(raw))


def predict_batch(
    artifact: ModelArtifact,
    essays,
    lexicon: frozenset[str],
    backend,
    connectors=None,
    micro_batch: int = 1,
) -> list[tuple[float, float]]:
    """Score essays with the exact training-time preprocessing pipeline.

    Accepts EssayRecords or plain strings; returns (raw, reported band)
    in input order. micro_batch defaults to 1 so a score is bit-identical
    no matter how the caller batches (batched matmul is not).
    """
    if connectors is None:
        connectors = load_connectors()
    inputs = []
    for essay in essays:
        text = essay if isinstance(essay, str) else essay.body
        tokenized = tokenize(text)
        issues = backend.check(text)
        features = build_features(text, tokenized, len(issues), lexicon, connectors)
        inputs.append(artifact.make_input(text, features))
    raws: list[float] = []
    for start in range(0, len(inputs), micro_batch):
        raws.extend(artifact.forward_inputs(inputs[start : start + micro_batch]))
    return [(raw, reported_band(raw)) for raw in raws]
