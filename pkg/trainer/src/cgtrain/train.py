"""Training loop: teacher forcing, Adam, NLL over pointer distributions."""

from __future__ import annotations

import numpy as np
import torch

from .data import DatasetSplit, Record, iter_batches, make_batch
from .model import PointerTransformer, TrainConfig, scored_accuracy, scored_nll


def build_model(config: TrainConfig) -> PointerTransformer:
    torch.manual_seed(config.seed)
    return PointerTransformer(config)


def train(
    config: TrainConfig,
    split: DatasetSplit,
    model: PointerTransformer | None = None,
    log=None,
    target_accuracy: float | None = None,
) -> PointerTransformer:
    """Train on the split; returns the model.

    `target_accuracy` (percent, teacher-forced, on the training records) stops
    early once reached. A non-finite loss aborts immediately.
    """
    if model is None:
        model = build_model(config)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    rng = np.random.default_rng(config.seed)
    for epoch in range(1, config.epochs + 1):
        model.train()
        total_loss = 0.0
        batches = 0
        for batch in iter_batches(split.train, config.batch_size, config.divisors, rng):
            logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
            loss = scored_nll(logits, batch.targets, batch.scored)
            if not torch.isfinite(loss):
                raise RuntimeError(f"training diverged at epoch {epoch} (non-finite loss)")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total_loss += float(loss.item())
            batches += 1
        if log is not None:
            val = eval_accuracy(model, split.validation, config) if split.validation else float("nan")
            log(epoch, total_loss / max(batches, 1), val)
        if target_accuracy is not None:
            if eval_accuracy(model, split.train, config) >= target_accuracy:
                break
    return model


@torch.no_grad()
def eval_accuracy(model: PointerTransformer, records: list[Record],
                  config: TrainConfig) -> float:
    """Teacher-forced accuracy: correctly predicted positions / scored positions."""
    if not records:
        return 0.0
    model.eval()
    correct = 0
    total = 0
    for batch in iter_batches(records, config.batch_size, config.divisors):
        logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
        hit, n = scored_accuracy(logits, batch.targets, batch.scored)
        correct += hit
        total += n
    return 100.0 * correct / max(total, 1)


@torch.no_grad()
def mean_loss(model: PointerTransformer, records: list[Record],
              config: TrainConfig) -> float:
    model.eval()
    losses = []
    weights = []
    for batch in iter_batches(records, config.batch_size, config.divisors):
        logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
        losses.append(float(scored_nll(logits, batch.targets, batch.scored).item()))
        weights.append(int(batch.scored.sum().item()))
    return float(np.average(losses, weights=weights)) if losses else 0.0


def record_loss(model: PointerTransformer, record: Record, config: TrainConfig) -> float:
    """Mean NLL over one record's scored positions."""
    batch = make_batch([record], config.divisors)
    logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
    return float(scored_nll(logits, batch.targets, batch.scored).item())
