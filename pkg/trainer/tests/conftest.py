"""Trainer test fixtures: a real pricing dataset produced by the CG solver."""

from __future__ import annotations

import pytest

from cgsched import CgConfig, generate_uniform, run_cg
from cgsched.driver import MODE_GREEDY_DP, emit_dataset

from cgtrain.data import load_dataset


@pytest.fixture(scope="session")
def dataset_path(tmp_path_factory):
    """JSONL pricing records from greedy-dp runs on two small instances."""
    path = tmp_path_factory.mktemp("data") / "pricing.jsonl"
    for seed, (m, n) in ((42, (2, 12)), (43, (2, 10))):
        inst = generate_uniform(m, n, seed)
        result = run_cg(
            inst,
            CgConfig(mode=MODE_GREEDY_DP, runs_per_machine=10, seed=seed,
                     collect_dataset=True),
        )
        emit_dataset(result, path)
    return path


@pytest.fixture(scope="session")
def split(dataset_path):
    return load_dataset(dataset_path)


@pytest.fixture(scope="session")
def overfit_records():
    """200 records from 2M20N greedy runs, the overfit-sanity corpus."""
    from cgtrain.data import parse_record

    records = []
    for seed in (42, 43):
        inst = generate_uniform(2, 20, seed)
        result = run_cg(
            inst,
            CgConfig(mode=MODE_GREEDY_DP, runs_per_machine=20, seed=seed,
                     collect_dataset=True),
        )
        records.extend(parse_record(r) for r in result.dataset_records)
    assert len(records) >= 200
    return records[:200]
