"""Cross-component parity: the numpy inference engine must reproduce the
trained torch model's activations on golden inputs."""

import json

import numpy as np
import pytest
import torch

from cgsched.nn import encode, greedy_decode, load_weights

from cgtrain import TrainConfig, build_model, emit_golden, export_weights


@pytest.fixture(scope="module")
def golden(tmp_path_factory, split):
    cfg = TrainConfig(d=32, h=4, n_enc=2, n_dec=2, seed=17)
    model = build_model(cfg)
    model.eval()
    out = tmp_path_factory.mktemp("golden")
    weights_path = out / "model.nncg1"
    golden_path = out / "golden.json"
    export_weights(model, cfg, weights_path)
    records = (split.validation + split.train)[:10]
    count = emit_golden(model, records, cfg, golden_path)
    assert count == 10
    return weights_path, golden_path


def test_golden_parity_with_primary_engine(golden):
    weights_path, golden_path = golden
    config, weights = load_weights(weights_path)
    cases = json.loads(golden_path.read_text())["cases"]
    assert len(cases) >= 10
    for case in cases:
        x = np.array(case["x"], dtype=np.float32)
        z = encode(x, weights, config)
        assert np.abs(z - np.array(case["z"], dtype=np.float64)).max() <= 1e-4
        trace = greedy_decode(x, weights, config)
        assert trace.tokens == case["tokens"]
        assert len(trace.distributions) == len(case["distributions"])
        for mine, theirs in zip(trace.distributions, case["distributions"]):
            theirs = np.array(theirs, dtype=np.float64)
            assert np.abs(mine - theirs).max() <= 1e-4
            assert abs(float(theirs.sum()) - 1.0) <= 1e-6


def test_emit_golden_requires_ten_inputs(split, tmp_path):
    cfg = TrainConfig(d=16, h=4, n_enc=1, n_dec=1, seed=1)
    model = build_model(cfg)
    with pytest.raises(ValueError, match="10"):
        emit_golden(model, split.train[:3], cfg, tmp_path / "g.json")
