"""Model configuration and closed-form parameter accounting."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_DIVISORS = (30.0, 100.0, 1000.0)  # processing time, weight, dual slots


@dataclass(frozen=True)
class ModelConfig:
    d: int = 64
    h: int = 8
    n_enc: int = 2
    n_dec: int = 2
    input_dim: int = 5
    ln_epsilon: float = 1e-5
    feature_divisors: tuple[float, float, float] = DEFAULT_DIVISORS

    def __post_init__(self) -> None:
        if self.d < 1 or self.h < 1 or self.n_enc < 1 or self.n_dec < 1:
            raise ValueError("all model dimensions must be >= 1")
        if self.d % self.h:
            raise ValueError(f"d={self.d} not divisible by h={self.h}")
        if any(div <= 0 for div in self.feature_divisors):
            raise ValueError("feature divisors must be positive")

    @property
    def d_k(self) -> int:
        return self.d // self.h

    @property
    def d_v(self) -> int:
        return self.d // self.h


def parameter_breakdown(config: ModelConfig) -> dict[str, int]:
    """Per-block learnable-parameter counts (all the published identities)."""
    d = config.d
    embed = config.input_dim * d
    # One multi-head block: per-head Q/K/V projections with biases plus the
    # output projection; stored as d x d matrices covering all heads.
    attention_block = 3 * (d * d + d) + d * d + d
    ffn = 2 * (d * d + d)
    layer_norm = 2 * d
    encoder_layer = attention_block + ffn + 2 * layer_norm
    decoder_layer = 2 * attention_block + ffn + 3 * layer_norm
    pointer = 2 * d * d + d
    return {
        "embedding": embed,
        "attention_block": attention_block,
        "ffn": ffn,
        "layer_norm": layer_norm,
        "encoder_layer": encoder_layer,
        "encoder_total": config.n_enc * encoder_layer,
        "decoder_layer": decoder_layer,
        "decoder_total": config.n_dec * decoder_layer,
        "pointer": pointer,
    }


def count_parameters(config: ModelConfig) -> int:
    parts = parameter_breakdown(config)
    return (
        parts["embedding"] + parts["encoder_total"] + parts["decoder_total"] + parts["pointer"]
    )
