"""Forward pass of the transformer-pointer pricer.

Input rows for a machine's pricing problem: row 0 is the machine (its dual),
rows 1..n are the jobs, row n+1 is the start token and row n+2 the end token.
The decoder is seeded with the start token and autoregressively points back
at input rows; emitting the end token terminates the schedule. No positional
encoding is added: the input is a set, and order information in the decoder
comes from the emitted prefix itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import WeightShapeError
from ..instance import Instance
from ..schedule import Column, DualSolution, make_column, reduced_cost
from .config import ModelConfig
from .kernels import NEG_INF, causal_mask, feed_forward, layer_norm, multi_head_attention, softmax
from .weights_io import ModelWeights

MACHINE_TOKEN = 0


def start_token(n: int) -> int:
    """Row index of the start marker for an n-job input."""
    return n + 1


def end_token(n: int) -> int:
    """Row index of the end marker for an n-job input."""
    return n + 2


def build_features(
    machine: int, instance: Instance, duals: DualSolution, config: ModelConfig
) -> np.ndarray:
    """(n+3) x 5 float32 feature matrix for one machine's pricing problem."""
    n = instance.num_jobs
    div_p, div_w, div_dual = config.feature_divisors
    x = np.zeros((n + 3, config.input_dim), dtype=np.float32)
    x[0, 2] = duals.sigma[machine] / div_dual
    for job in instance.jobs:
        x[job.id, 0] = job.proc_times[machine] / div_p
        x[job.id, 1] = job.weight / div_w
        x[job.id, 2] = duals.pi[job.id - 1] / div_dual
    x[n + 1, 3] = 1.0  # start token
    x[n + 2, 4] = 1.0  # end token
    return x


def _check_shapes(x: np.ndarray, weights: ModelWeights, config: ModelConfig) -> None:
    embed = weights["embed.W"]
    if embed.shape != (config.input_dim, config.d):
        raise WeightShapeError(
            f"embed.W has shape {embed.shape}, config wants {(config.input_dim, config.d)}"
        )
    if x.shape[1] != config.input_dim:
        raise WeightShapeError(f"feature matrix has {x.shape[1]} columns, not {config.input_dim}")
    if f"enc.{config.n_enc - 1}.sa.Wq" not in weights.tensors:
        raise WeightShapeError(f"weights do not provide {config.n_enc} encoder layers")
    if f"dec.{config.n_dec - 1}.sa.Wq" not in weights.tensors:
        raise WeightShapeError(f"weights do not provide {config.n_dec} decoder layers")


def _encoder_layer(g: np.ndarray, weights: ModelWeights, config: ModelConfig, i: int) -> np.ndarray:
    sa = multi_head_attention(g, g, weights.block(f"enc.{i}.sa"), config.h)
    ln1 = weights.block(f"enc.{i}.ln1")
    g = layer_norm(g + sa, ln1["w"], ln1["b"], config.ln_epsilon)
    ff = feed_forward(g, weights.block(f"enc.{i}.ffn"))
    ln2 = weights.block(f"enc.{i}.ln2")
    return layer_norm(g + ff, ln2["w"], ln2["b"], config.ln_epsilon)


def encode(x: np.ndarray, weights: ModelWeights, config: ModelConfig) -> np.ndarray:
    """Context matrix Z, one d-vector per input row."""
    _check_shapes(np.asarray(x), weights, config)
    g = np.asarray(x, dtype=np.float64) @ weights["embed.W"].astype(np.float64)
    for i in range(config.n_enc):
        g = _encoder_layer(g, weights, config, i)
    return g.astype(np.float32)


def _decoder_stack(
    prefix_embed: np.ndarray, z: np.ndarray, weights: ModelWeights, config: ModelConfig
) -> np.ndarray:
    g = prefix_embed
    mask = causal_mask(g.shape[0])
    for i in range(config.n_dec):
        sa = multi_head_attention(g, g, weights.block(f"dec.{i}.sa"), config.h, mask)
        ln1 = weights.block(f"dec.{i}.ln1")
        g = layer_norm(g + sa, ln1["w"], ln1["b"], config.ln_epsilon)
        ca = multi_head_attention(g, z, weights.block(f"dec.{i}.ca"), config.h)
        ln2 = weights.block(f"dec.{i}.ln2")
        g = layer_norm(g + ca, ln2["w"], ln2["b"], config.ln_epsilon)
        ff = feed_forward(g, weights.block(f"dec.{i}.ffn"))
        ln3 = weights.block(f"dec.{i}.ln3")
        g = layer_norm(g + ff, ln3["w"], ln3["b"], config.ln_epsilon)
    return g


def _pointer_scores(z: np.ndarray, o_i: np.ndarray, weights: ModelWeights) -> np.ndarray:
    w1 = weights["ptr.W1"].astype(np.float64)
    w2 = weights["ptr.W2"].astype(np.float64)
    v = weights["ptr.v"].astype(np.float64)
    return np.tanh(z @ w1.T + o_i @ w2.T) @ v


@dataclass
class DecodeTrace:
    tokens: list[int]
    distributions: list[np.ndarray]
    encoder_output: np.ndarray
    step_outputs: list[np.ndarray] = field(default_factory=list)


def greedy_decode(x: np.ndarray, weights: ModelWeights, config: ModelConfig) -> DecodeTrace:
    """Autoregressive argmax decoding over the input rows.

    The start row seeds the decoder and is never selectable; emitted rows are
    masked out of later steps, so tokens are pairwise distinct. Decoding stops
    at the end token or after n+3 steps, whichever comes first.
    """
    x = np.asarray(x)
    rows = x.shape[0]
    start_idx = rows - 2
    end_idx = rows - 1
    z32 = encode(x, weights, config)
    z = z32.astype(np.float64)
    embed = np.asarray(x, dtype=np.float64) @ weights["embed.W"].astype(np.float64)

    tokens: list[int] = []
    distributions: list[np.ndarray] = []
    step_outputs: list[np.ndarray] = []
    prefix = [start_idx]
    for _ in range(rows):
        out = _decoder_stack(embed[prefix], z, weights, config)
        o_i = out[-1]
        scores = _pointer_scores(z, o_i, weights)
        scores[prefix] = NEG_INF
        scores[start_idx] = NEG_INF
        dist = softmax(scores)
        token = int(np.argmax(dist))
        tokens.append(token)
        distributions.append(dist.astype(np.float32))
        step_outputs.append(o_i.astype(np.float32))
        if token == end_idx:
            break
        prefix.append(token)
    return DecodeTrace(
        tokens=tokens,
        distributions=distributions,
        encoder_output=z32,
        step_outputs=step_outputs,
    )


def predict_column(
    machine: int,
    instance: Instance,
    duals: DualSolution,
    weights: ModelWeights,
    config: ModelConfig,
) -> tuple[Column, float] | None:
    """Decode a schedule for the machine and price it exactly.

    Machine/start/end tokens are dropped; the remaining rows are job ids. The
    column is rebuilt in SWPT order, so its cost and reduced cost are exact
    regardless of the emission order. Returns None for an empty schedule.
    """
    x = build_features(machine, instance, duals, config)
    trace = greedy_decode(x, weights, config)
    job_ids = [t for t in trace.tokens if 1 <= t <= instance.num_jobs]
    if not job_ids:
        return None
    col = make_column(machine, job_ids, instance)
    return col, reduced_cost(col, duals)
