import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgsched import generate_uniform, generate_weibull, parse_instance_name
from cgsched.errors import InstanceParseError, MalformedNameError
from cgsched.instance import read_instance, write_instance


def test_uniform_ranges_and_shape():
    inst = generate_uniform(2, 20, 1)
    assert inst.num_jobs == 20 and inst.num_machines == 2
    assert all(1 <= j.weight <= 100 for j in inst.jobs)
    times = [p for j in inst.jobs for p in j.proc_times]
    assert len(times) == 40
    assert all(1 <= p <= 30 for p in times)


def test_uniform_deterministic():
    assert generate_uniform(2, 20, 1) == generate_uniform(2, 20, 1)
    assert generate_uniform(2, 20, 1) != generate_uniform(2, 20, 2)


def test_uniform_weight_mean_monte_carlo():
    inst = generate_uniform(1, 100_000, 123)
    mean = np.mean([j.weight for j in inst.jobs])
    assert abs(mean - 50.5) < 0.5


def test_weibull_means_monte_carlo():
    inst = generate_weibull(1, 100_000, 123)
    weight_mean = np.mean([j.weight for j in inst.jobs])
    proc_mean = np.mean([j.proc_times[0] for j in inst.jobs])
    assert abs(weight_mean - 50.0 * math.gamma(1 + 1 / 1.5)) < 0.5
    assert abs(proc_mean - 15.0 * math.gamma(1.5)) < 0.3


def test_weibull_clamped_to_one():
    inst = generate_weibull(3, 2000, 5)
    assert min(j.weight for j in inst.jobs) >= 1
    assert min(p for j in inst.jobs for p in j.proc_times) >= 1


def test_weibull_deterministic():
    assert generate_weibull(4, 50, 9) == generate_weibull(4, 50, 9)


@pytest.mark.parametrize(
    "name,expected",
    [("2M20N_1_20", (2, 20, 1, 20)), ("4M30N_7_5", (4, 30, 7, 5))],
)
def test_parse_instance_name(name, expected):
    assert parse_instance_name(name) == expected


@pytest.mark.parametrize("bad", ["20jobs", "2M20N_1", "M20N_1_5", "2M20N_1_20_x"])
def test_parse_instance_name_rejects(bad):
    with pytest.raises(MalformedNameError):
        parse_instance_name(bad)


def test_round_trip(tmp_path):
    inst = generate_uniform(2, 20, 1)
    path = tmp_path / "a.inst.json"
    write_instance(inst, path)
    assert read_instance(path) == inst


def test_missing_jobs_field(tmp_path):
    path = tmp_path / "bad.inst.json"
    path.write_text(json.dumps({"name": "x", "machines": 1, "seed": 0, "dist": "custom"}))
    with pytest.raises(InstanceParseError, match="jobs"):
        read_instance(path)


def test_zero_weight_rejected(tmp_path):
    doc = {
        "name": "x",
        "machines": 1,
        "seed": 0,
        "dist": "custom",
        "jobs": [{"id": 1, "w": 0, "p": [3]}],
    }
    path = tmp_path / "bad.inst.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(InstanceParseError, match="weight"):
        read_instance(path)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.inst.json"
    path.write_text("{not json")
    with pytest.raises(InstanceParseError, match="line"):
        read_instance(path)


@settings(max_examples=25, deadline=None)
@given(
    m=st.integers(1, 4),
    n=st.integers(1, 15),
    seed=st.integers(0, 2**32),
    weibull=st.booleans(),
)
def test_round_trip_property(tmp_path_factory, m, n, seed, weibull):
    gen = generate_weibull if weibull else generate_uniform
    inst = gen(m, n, seed)
    path = tmp_path_factory.mktemp("inst") / "p.inst.json"
    write_instance(inst, path)
    assert read_instance(path) == inst
