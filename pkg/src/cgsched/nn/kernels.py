"""Attention and normalization kernels.

Inputs and parameters are float32 at rest; arithmetic runs in float64 and the
model layer casts back at its boundaries. The wider accumulator keeps the
encoder exactly permutation-equivariant over job rows after the final cast,
which the pure float32 pipeline cannot guarantee (summation-order rounding).
"""

from __future__ import annotations

import numpy as np

NEG_INF = float("-inf")


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Rows with -inf entries get exact zeros there; finite entries normalize to 1."""
    x = np.asarray(x, dtype=np.float64)
    finite_max = np.max(np.where(np.isneginf(x), -np.inf, x), axis=axis, keepdims=True)
    shifted = x - finite_max
    expd = np.exp(shifted)
    expd[np.isneginf(x)] = 0.0
    return expd / np.sum(expd, axis=axis, keepdims=True)


def attention(q: np.ndarray, k: np.ndarray, v: np.ndarray,
              mask: np.ndarray | None = None) -> np.ndarray:
    """softmax(Q K^T / sqrt(d_k) + mask) V with mask entries in {0, -inf}."""
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    scores = q @ k.T / np.sqrt(q.shape[-1])
    if mask is not None:
        scores = scores + mask
    return softmax(scores, axis=-1) @ v


def causal_mask(size: int) -> np.ndarray:
    """Upper-triangular -inf mask: position i attends to positions <= i."""
    mask = np.zeros((size, size), dtype=np.float64)
    mask[np.triu_indices(size, k=1)] = NEG_INF
    return mask


def layer_norm(x: np.ndarray, w: np.ndarray, b: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-row standardization (population std, epsilon-stabilized), then scale/shift."""
    x = np.asarray(x, dtype=np.float64)
    mean = np.mean(x, axis=-1, keepdims=True)
    var = np.mean((x - mean) ** 2, axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + epsilon) * np.asarray(w, dtype=np.float64) + np.asarray(
        b, dtype=np.float64
    )


def multi_head_attention(
    x_q: np.ndarray,
    x_kv: np.ndarray,
    params: dict[str, np.ndarray],
    h: int,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Multi-head attention with fused per-head projections.

    `params` holds Wq/Wk/Wv/Wo (d x d) and bq/bk/bv/bo (d); head i uses the
    contiguous column slice [i*d_k, (i+1)*d_k) of each projection.
    """
    d = params["Wq"].shape[0]
    d_k = d // h
    q = np.asarray(x_q, dtype=np.float64) @ params["Wq"].astype(np.float64) + params["bq"]
    k = np.asarray(x_kv, dtype=np.float64) @ params["Wk"].astype(np.float64) + params["bk"]
    v = np.asarray(x_kv, dtype=np.float64) @ params["Wv"].astype(np.float64) + params["bv"]
    heads = [
        attention(
            q[:, i * d_k : (i + 1) * d_k],
            k[:, i * d_k : (i + 1) * d_k],
            v[:, i * d_k : (i + 1) * d_k],
            mask,
        )
        for i in range(h)
    ]
    return np.concatenate(heads, axis=-1) @ params["Wo"].astype(np.float64) + params["bo"]


def feed_forward(x: np.ndarray, params: dict[str, np.ndarray]) -> np.ndarray:
    """Two position-wise linear maps with a ReLU in between."""
    x = np.asarray(x, dtype=np.float64)
    hidden = np.maximum(x @ params["W1"].astype(np.float64) + params["b1"], 0.0)
    return hidden @ params["W2"].astype(np.float64) + params["b2"]
