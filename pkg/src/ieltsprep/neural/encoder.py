"""Text encoders for the hybrid scorer.

The default "tiny" encoder is a small in-repo transformer with a
word-level vocabulary built from the shipped frequency lexicon, so the
whole training stack works offline and deterministically. Any
HuggingFace model id can be used instead when the checkpoint is
available locally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import torch
from torch import nn

from ..features import load_frequency_lexicon

_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*|[0-9]+|[^\sA-Za-z0-9]")

PAD_ID = 0
UNK_ID = 1


class EncoderError(ValueError):
    """Raised for unknown encoder ids or invalid encoder configs."""


@dataclass(frozen=True)
class EncoderConfig:
    encoder_id: str = "tiny"
    max_tokens: int = 256
    frozen_layer_count: int = 2
    # tiny-encoder architecture knobs (ignored for external checkpoints)
    hidden_dim: int = 64
    num_layers: int = 4
    num_heads: int = 4
    ff_dim: int = 128

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise EncoderError("max_tokens must be positive")
        if self.frozen_layer_count < 0:
            raise EncoderError("frozen_layer_count must be nonnegative")


class WordVocab:
    """Deterministic word-level vocabulary from the frequency lexicon file."""

    def __init__(self, words: list[str] | None = None):
        if words is None:
            # full shipped list, in rank order, independent of any training data
            words = sorted(load_frequency_lexicon(top_k=10**9))
        self.id_by_token = {"[PAD]": PAD_ID, "[UNK]": UNK_ID}
        for word in words:
            self.id_by_token.setdefault(word, len(self.id_by_token))

    def __len__(self):
        return len(self.id_by_token)

    def encode(self, text: str, max_tokens: int) -> tuple[list[int], list[int]]:
        """Tokenize, map to ids, truncate to the leading tokens, pad."""
        tokens = [t.lower() for t in _TOKEN_RE.findall(text)][:max_tokens]
        ids = [self.id_by_token.get(t, UNK_ID) for t in tokens]
        mask = [1] * len(ids)
        pad = max_tokens - len(ids)
        return ids + [PAD_ID] * pad, mask + [0] * pad


class TinyTransformerEncoder(nn.Module):
    """Small trainable transformer over the word vocabulary."""

    def __init__(self, config: EncoderConfig, vocab_size: int):
        super().__init__()
        if config.frozen_layer_count > config.num_layers:
            raise EncoderError(
                f"frozen_layer_count {config.frozen_layer_count} exceeds "
                f"encoder depth {config.num_layers}"
            )
        self.config = config
        self.embedding = nn.Embedding(vocab_size, config.hidden_dim, padding_idx=PAD_ID)
        self.position = nn.Embedding(config.max_tokens, config.hidden_dim)
        self.layers = nn.ModuleList(
            nn.TransformerEncoderLayer(
                d_model=config.hidden_dim,
                nhead=config.num_heads,
                dim_feedforward=config.ff_dim,
                batch_first=True,
                dropout=0.0,
            )
            for _ in range(config.num_layers)
        )
        self.hidden_dim = config.hidden_dim
        self.depth = config.num_layers

    def forward(self, token_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(token_ids.shape[1], device=token_ids.device)
        hidden = self.embedding(token_ids) + self.position(positions)[None, :, :]
        key_padding_mask = attention_mask == 0
        for layer in self.layers:
            hidden = layer(hidden, src_key_padding_mask=key_padding_mask)
        return hidden

    def bottom_parameters(self, frozen_layer_count: int):
        """Parameters excluded from optimization when partially frozen."""
        params = []
        if frozen_layer_count > 0:
            params += list(self.embedding.parameters()) + list(self.position.parameters())
            for layer in self.layers[:frozen_layer_count]:
                params += list(layer.parameters())
        return params


class HFEncoder(nn.Module):
    """Adapter for a pretrained HuggingFace encoder checkpoint."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderError("transformers is not installed") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(config.encoder_id)
            self.model = AutoModel.from_pretrained(config.encoder_id)
        except Exception as exc:
            raise EncoderError(f"unknown or unavailable encoder id {config.encoder_id!r}: {exc}") from exc
        self.config = config
        self.hidden_dim = self.model.config.hidden_size
        self.depth = self.model.config.num_hidden_layers
        if config.frozen_layer_count > self.depth:
            raise EncoderError("frozen_layer_count exceeds encoder depth")

    def encode(self, text: str, max_tokens: int) -> tuple[list[int], list[int]]:
        out = self.tokenizer(
            text, truncation=True, padding="max_length", max_length=max_tokens
        )
        return out["input_ids"], out["attention_mask"]

    def forward(self, token_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.model(input_ids=token_ids, attention_mask=attention_mask).last_hidden_state

    def bottom_parameters(self, frozen_layer_count: int):
        params = []
        if frozen_layer_count > 0:
            params += list(self.model.embeddings.parameters())
            layers = self.model.transformer.layer if hasattr(self.model, "transformer") \
                else self.model.encoder.layer
            for layer in layers[:frozen_layer_count]:
                params += list(layer.parameters())
        return params


def build_encoder(config: EncoderConfig) -> tuple[nn.Module, "Tokenizerlike"]:
    """Return (encoder module, tokenizer adapter with .encode(text, max_tokens))."""
    if config.encoder_id == "tiny":
        vocab = WordVocab()
        return TinyTransformerEncoder(config, len(vocab)), vocab
    encoder = HFEncoder(config)
    return encoder, encoder


def masked_mean_pool(hidden: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
    """Mean over non-pad positions of the final hidden states."""
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
