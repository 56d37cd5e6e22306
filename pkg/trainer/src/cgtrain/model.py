"""Transformer-pointer model (PyTorch).

Parameter matrices are stored in the x @ W + b orientation so tensors export
to the NNCG1 container byte-for-byte without transposes. Architecture:
post-norm encoder/decoder stacks sharing one input embedding, and a pointer
head scoring every input row at each decoding step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

NEG_INF = float("-inf")


@dataclass
class TrainConfig:
    # Defaults are the tuned training configuration.
    d: int = 64
    h: int = 8
    n_enc: int = 2
    n_dec: int = 2
    dropout: float = 0.0
    weight_decay: float = 1e-6
    batch_size: int = 16
    learning_rate: float = 1e-4
    epochs: int = 150
    seed: int = 0
    divisors: tuple[float, float, float] = (30.0, 100.0, 1000.0)
    input_dim: int = 5
    ln_epsilon: float = 1e-5

    def __post_init__(self) -> None:
        if self.d % self.h:
            raise ValueError(f"d={self.d} not divisible by h={self.h}")


class Affine(nn.Module):
    """y = x @ W + b with W stored as (in, out)."""

    def __init__(self, d_in: int, d_out: int, dtype=torch.float32):
        super().__init__()
        self.W = nn.Parameter(torch.empty(d_in, d_out, dtype=dtype))
        self.b = nn.Parameter(torch.zeros(d_out, dtype=dtype))
        nn.init.xavier_normal_(self.W)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x @ self.W + self.b


class MultiHeadAttention(nn.Module):
    def __init__(self, d: int, h: int, dtype=torch.float32):
        super().__init__()
        self.h = h
        self.d_k = d // h
        self.q = Affine(d, d, dtype)
        self.k = Affine(d, d, dtype)
        self.v = Affine(d, d, dtype)
        self.out = Affine(d, d, dtype)

    def forward(self, x_q, x_kv, mask=None):
        """mask: additive (L_q, L_k) with 0 / -inf entries, or None."""
        batch, l_q, d = x_q.shape
        l_k = x_kv.shape[1]
        q = self.q(x_q).view(batch, l_q, self.h, self.d_k).transpose(1, 2)
        k = self.k(x_kv).view(batch, l_k, self.h, self.d_k).transpose(1, 2)
        v = self.v(x_kv).view(batch, l_k, self.h, self.d_k).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d_k)
        if mask is not None:
            scores = scores + mask
        probs = torch.softmax(scores, dim=-1)
        mixed = (probs @ v).transpose(1, 2).reshape(batch, l_q, d)
        return self.out(mixed)


class FeedForward(nn.Module):
    def __init__(self, d: int, dtype=torch.float32):
        super().__init__()
        self.lin1 = Affine(d, d, dtype)
        self.lin2 = Affine(d, d, dtype)

    def forward(self, x):
        return self.lin2(torch.relu(self.lin1(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: TrainConfig, dtype=torch.float32):
        super().__init__()
        self.sa = MultiHeadAttention(cfg.d, cfg.h, dtype)
        self.ffn = FeedForward(cfg.d, dtype)
        self.ln1 = nn.LayerNorm(cfg.d, eps=cfg.ln_epsilon, dtype=dtype)
        self.ln2 = nn.LayerNorm(cfg.d, eps=cfg.ln_epsilon, dtype=dtype)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, g):
        g = self.ln1(g + self.drop(self.sa(g, g)))
        return self.ln2(g + self.drop(self.ffn(g)))


class DecoderLayer(nn.Module):
    def __init__(self, cfg: TrainConfig, dtype=torch.float32):
        super().__init__()
        self.sa = MultiHeadAttention(cfg.d, cfg.h, dtype)
        self.ca = MultiHeadAttention(cfg.d, cfg.h, dtype)
        self.ffn = FeedForward(cfg.d, dtype)
        self.ln1 = nn.LayerNorm(cfg.d, eps=cfg.ln_epsilon, dtype=dtype)
        self.ln2 = nn.LayerNorm(cfg.d, eps=cfg.ln_epsilon, dtype=dtype)
        self.ln3 = nn.LayerNorm(cfg.d, eps=cfg.ln_epsilon, dtype=dtype)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, g, z, causal):
        g = self.ln1(g + self.drop(self.sa(g, g, causal)))
        g = self.ln2(g + self.drop(self.ca(g, z)))
        return self.ln3(g + self.drop(self.ffn(g)))


class PointerHead(nn.Module):
    def __init__(self, d: int, dtype=torch.float32):
        super().__init__()
        self.v = nn.Parameter(torch.empty(d, dtype=dtype))
        self.W1 = nn.Parameter(torch.empty(d, d, dtype=dtype))
        self.W2 = nn.Parameter(torch.empty(d, d, dtype=dtype))
        nn.init.normal_(self.v, std=1.0 / math.sqrt(d))
        nn.init.xavier_normal_(self.W1)
        nn.init.xavier_normal_(self.W2)

    def forward(self, z, o):
        """z: (B, R, d) encoder rows; o: (B, T, d) step outputs -> (B, T, R)."""
        zp = (z @ self.W1.transpose(0, 1)).unsqueeze(1)  # B,1,R,d
        op = (o @ self.W2.transpose(0, 1)).unsqueeze(2)  # B,T,1,d
        return torch.tanh(zp + op) @ self.v


class PointerTransformer(nn.Module):
    def __init__(self, cfg: TrainConfig, dtype=torch.float32):
        super().__init__()
        self.cfg = cfg
        self.embed = nn.Parameter(torch.empty(cfg.input_dim, cfg.d, dtype=dtype))
        nn.init.xavier_normal_(self.embed)
        self.encoder = nn.ModuleList(EncoderLayer(cfg, dtype) for _ in range(cfg.n_enc))
        self.decoder = nn.ModuleList(DecoderLayer(cfg, dtype) for _ in range(cfg.n_dec))
        self.pointer = PointerHead(cfg.d, dtype)

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        g = x @ self.embed
        for layer in self.encoder:
            g = layer(g)
        return g

    def decode(self, embedded: torch.Tensor, prefix_rows: torch.Tensor,
               z: torch.Tensor) -> torch.Tensor:
        """Teacher-forced decoder outputs for prefix token rows (B, T)."""
        g = torch.stack(
            [embedded[b, prefix_rows[b]] for b in range(prefix_rows.shape[0])]
        )
        length = prefix_rows.shape[1]
        causal = torch.full((length, length), NEG_INF, dtype=g.dtype)
        causal = torch.triu(causal, diagonal=1)
        for layer in self.decoder:
            g = layer(g, z, causal)
        return g

    def forward(self, x: torch.Tensor, dec_tokens: torch.Tensor,
                pointer_mask: torch.Tensor) -> torch.Tensor:
        """Pointer logits (B, T, R) with -inf on already-used rows."""
        embedded = x @ self.embed
        z = self.encode(x)
        outputs = self.decode(embedded, dec_tokens, z)
        logits = self.pointer(z, outputs)
        return logits.masked_fill(pointer_mask, NEG_INF)

    @torch.no_grad()
    def greedy_decode(self, x_single: torch.Tensor):
        """Autoregressive decoding of one unbatched input (R, 5).

        Returns (tokens, distributions, Z, step outputs); mirrors the
        inference engine: start row seeds the loop and stays masked, emitted
        rows are masked, stop at the end row or after R steps.
        """
        rows = x_single.shape[0]
        start, end = rows - 2, rows - 1
        x = x_single.unsqueeze(0)
        embedded = x @ self.embed
        z = self.encode(x)
        tokens: list[int] = []
        dists: list[np.ndarray] = []
        outs: list[np.ndarray] = []
        prefix = [start]
        for _ in range(rows):
            rows_t = torch.tensor([prefix], dtype=torch.long)
            out = self.decode(embedded, rows_t, z)
            o_t = out[0, -1]
            scores = self.pointer(z, o_t.view(1, 1, -1))[0, 0]
            scores[prefix] = NEG_INF
            scores[start] = NEG_INF
            dist = torch.softmax(scores, dim=-1)
            token = int(np.argmax(dist.numpy()))
            tokens.append(token)
            dists.append(dist.numpy().copy())
            outs.append(o_t.numpy().copy())
            if token == end:
                break
            prefix.append(token)
        return tokens, dists, z[0].numpy().copy(), outs


def scored_nll(logits: torch.Tensor, targets: torch.Tensor,
               scored: torch.Tensor) -> torch.Tensor:
    """Mean negative log-likelihood over the scored (non-padded) positions."""
    logp = torch.log_softmax(logits, dim=-1)
    picked = logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    return -(picked[scored]).mean()


def scored_accuracy(logits: torch.Tensor, targets: torch.Tensor,
                    scored: torch.Tensor) -> tuple[int, int]:
    """(correct, total) argmax matches over scored positions."""
    pred = logits.argmax(dim=-1)
    hit = (pred == targets) & scored
    return int(hit.sum().item()), int(scored.sum().item())
