"""Training configuration and its defaults."""

from __future__ import annotations

from dataclasses import dataclass, fields

from ..errors import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    embed_dim: int = 768
    encoder_hidden: int = 800
    decoder_hidden: int = 800
    dropout_rate: float = 0.1
    num_heads: int = 8
    max_seq_len: int = 128
    learning_rate: float = 2e-5
    epochs: int = 180
    bias_weight: float = 15.0
    seed: int = 0
    # trainable-lookup provider vocabulary buckets
    embed_buckets: int = 50000

    def __post_init__(self):
        if self.embed_dim <= 0 or self.encoder_hidden <= 0 or self.decoder_hidden <= 0:
            raise ConfigError("dimensions must be positive")
        if self.embed_dim % self.num_heads != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} not divisible by num_heads {self.num_heads}"
            )
        if (2 * self.encoder_hidden) % self.num_heads != 0:
            raise ConfigError(
                f"encoder output dim {2 * self.encoder_hidden} not divisible by"
                f" num_heads {self.num_heads}"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.bias_weight < 1.0:
            raise ConfigError(f"bias_weight must be >= 1, got {self.bias_weight}")
        if self.max_seq_len < 1 or self.epochs < 0:
            raise ConfigError("max_seq_len must be >= 1 and epochs >= 0")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)
