import math

import numpy as np
import pytest
import torch

from cgtrain import TrainConfig, build_model
from cgtrain.data import Record, make_batch
from cgtrain.model import scored_accuracy, scored_nll


def test_parameter_count_best_config():
    model = build_model(TrainConfig())
    assert sum(p.numel() for p in model.parameters()) == 142_976


def test_parameter_count_small_config():
    cfg = TrainConfig(d=16, h=2, n_enc=1, n_dec=3)
    model = build_model(cfg)
    d = cfg.d
    attn = 4 * d * d + 4 * d
    enc = attn + 2 * (d * d + d) + 4 * d
    dec = 2 * attn + 2 * (d * d + d) + 6 * d
    expected = 5 * d + cfg.n_enc * enc + cfg.n_dec * dec + 2 * d * d + d
    assert sum(p.numel() for p in model.parameters()) == expected


def _toy_batch():
    jobs = [{"id": i, "p": i, "w": 1, "pi": 0.5} for i in range(1, 4)]
    rec = Record("a", 0, 1, -1.0, jobs, target=[4, 3, 1, 0, 5])
    return make_batch([rec], (1.0, 1.0, 1.0))


def test_forward_shapes_and_masked_logits():
    torch.manual_seed(0)
    model = build_model(TrainConfig(d=16, h=4, n_enc=1, n_dec=1, seed=0))
    batch = _toy_batch()
    logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
    assert logits.shape == (1, 4, 6)
    # Probability mass is exactly zero on rows already used at each step.
    probs = torch.softmax(logits, dim=-1).detach()
    assert float(probs[0, 0, 4]) == 0.0  # start row masked from step 0
    assert float(probs[0, 1, 3]) == 0.0  # token 3 emitted at step 0
    assert float(probs[0, 2, 1]) == 0.0  # token 1 emitted at step 1
    sums = probs.sum(dim=-1)
    assert torch.allclose(sums, torch.ones_like(sums), atol=1e-6)


def test_zero_pointer_gives_uniform_loss():
    # With v = 0 every unmasked row is equally likely, so the NLL per scored
    # position is exactly ln(unmasked count).
    model = build_model(TrainConfig(d=16, h=4, n_enc=1, n_dec=1, seed=1))
    with torch.no_grad():
        model.pointer.v.zero_()
    batch = _toy_batch()
    logits = model(batch.x, batch.dec_tokens, batch.pointer_mask)
    loss = scored_nll(logits, batch.targets, batch.scored).detach()
    rows = 6
    counts = [rows - (t + 1) for t in range(4)]  # prefix grows by one each step
    expected = float(np.mean([math.log(c) for c in counts]))
    assert float(loss) == pytest.approx(expected, abs=1e-6)


def test_teacher_forcing_uses_targets_not_predictions():
    # Perturbing a FUTURE target row must not change earlier logits.
    torch.manual_seed(2)
    model = build_model(TrainConfig(d=16, h=4, n_enc=1, n_dec=1, seed=2))
    batch = _toy_batch()
    base = model(batch.x, batch.dec_tokens, batch.pointer_mask)
    altered = batch.dec_tokens.clone()
    altered[0, -1] = 2  # change the last teacher token
    out = model(batch.x, altered, batch.pointer_mask)
    assert torch.equal(out[0, :3], base[0, :3])
    assert not torch.equal(out[0, 3], base[0, 3])


def test_scored_accuracy_counts_positions():
    logits = torch.full((1, 5, 7), -10.0)
    targets = torch.tensor([[1, 2, 3, 0, 6]])
    for t, row in enumerate([1, 2, 5, 0, 4]):  # 3 of 5 match the target
        logits[0, t, row] = 10.0
    scored = torch.ones(1, 5, dtype=torch.bool)
    correct, total = scored_accuracy(logits, targets, scored)
    assert (correct, total) == (3, 5)
    scored[0, -1] = False  # padding is excluded
    assert scored_accuracy(logits, targets, scored) == (3, 4)


def test_greedy_decode_masks_and_terminates():
    torch.manual_seed(3)
    cfg = TrainConfig(d=16, h=4, n_enc=1, n_dec=1, seed=3)
    model = build_model(cfg)
    rec = Record(
        "a", 0, 1, -2.0,
        [{"id": i, "p": 2 * i, "w": 5, "pi": 1.5} for i in range(1, 6)],
        target=None,
    )
    x = torch.from_numpy(rec.features(cfg.divisors))
    tokens, dists, z, outs = model.greedy_decode(x)
    rows = x.shape[0]
    assert len(tokens) == len(set(tokens)) <= rows
    assert all(t != rows - 2 for t in tokens)  # start row never emitted
    assert z.shape == (rows, cfg.d)
    for dist in dists:
        assert float(np.sum(dist)) == pytest.approx(1.0, abs=1e-6)
