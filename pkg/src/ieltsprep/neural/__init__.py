from .encoder import EncoderConfig, EncoderError, WordVocab, build_encoder, masked_mean_pool
from .model import (
    HybridInput,
    HybridScorer,
    ModelArtifact,
    ModelError,
    TrainConfig,
    TrainingHistory,
    forward,
    predict_batch,
    reported_band,
)
from .train import train

__all__ = [
    "EncoderConfig",
    "EncoderError",
    "WordVocab",
    "build_encoder",
    "masked_mean_pool",
    "HybridInput",
    "HybridScorer",
    "ModelArtifact",
    "ModelError",
    "TrainConfig",
    "TrainingHistory",
    "forward",
    "predict_batch",
    "reported_band",
    "train",
]
