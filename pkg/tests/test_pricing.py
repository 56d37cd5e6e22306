import time

import numpy as np
import pytest

from cgsched import (
    DualSolution,
    brute_force_pricing,
    generate_uniform,
    k_best_columns,
    reduced_cost,
    solve_pricing_dp,
)
from cgsched.errors import PricingSizeError
from cgsched.pricing import _dp_inputs, _fill_table

from conftest import enumerate_pricing, make_instance, random_duals


@pytest.fixture
def two_job():
    # Subset values: {}=0, {1}=2*3-7=-1, {2}=3*1-2=1, {1,2}=11-9=2.
    inst = make_instance([3, 1], [(2,), (3,)])
    duals = DualSolution(pi=np.array([7.0, 2.0]), sigma=np.array([0.0]))
    return inst, duals


def test_dp_two_job_example(two_job):
    inst, duals = two_job
    res = solve_pricing_dp(0, inst, duals)
    assert res.min_reduced_cost == pytest.approx(-1.0, abs=1e-12)
    assert res.column is not None and res.column.jobs == (1,)


def test_dp_zero_duals_no_column():
    inst = generate_uniform(1, 6, 2)
    duals = DualSolution(pi=np.zeros(6), sigma=np.array([0.0]))
    res = solve_pricing_dp(0, inst, duals)
    assert res.min_reduced_cost == 0.0
    assert res.column is None


def test_dp_single_job():
    inst = make_instance([1], [(2,)])
    duals = DualSolution(pi=np.array([5.0]), sigma=np.array([0.0]))
    res = solve_pricing_dp(0, inst, duals)
    assert res.min_reduced_cost == pytest.approx(-3.0)
    assert res.column.jobs == (1,)


def test_dp_matches_enumeration_small():
    for seed in range(30):
        n = 1 + seed % 8
        inst = generate_uniform(2, n, seed)
        duals = random_duals(seed, n, 2)
        for k in range(2):
            res = solve_pricing_dp(k, inst, duals)
            expect_rc, expect_set = enumerate_pricing(inst, k, duals)
            assert res.min_reduced_cost == pytest.approx(expect_rc, abs=1e-9)
            if res.column is not None:
                assert reduced_cost(res.column, duals) == pytest.approx(
                    res.min_reduced_cost, abs=1e-9
                )


def test_dp_matches_brute_force_oracle():
    for seed in range(40):
        n = 2 + seed % 11
        inst = generate_uniform(2, n, 1000 + seed)
        duals = random_duals(seed, n, 2)
        for k in range(2):
            dp = solve_pricing_dp(k, inst, duals)
            bf = brute_force_pricing(k, inst, duals)
            assert abs(dp.min_reduced_cost - bf.min_reduced_cost) <= 1e-9


def test_dp_monotone_in_job_dual():
    inst = generate_uniform(1, 8, 4)
    duals = random_duals(4, 8, 1)
    base = solve_pricing_dp(0, inst, duals).min_reduced_cost
    for j in range(8):
        bumped = DualSolution(pi=duals.pi.copy(), sigma=duals.sigma)
        bumped.pi[j] += 25.0
        assert solve_pricing_dp(0, inst, bumped).min_reduced_cost <= base + 1e-12


def test_k_best_k1_matches_solve(two_job):
    inst, duals = two_job
    cols = k_best_columns(0, inst, duals, 1)
    assert cols == [solve_pricing_dp(0, inst, duals).column]


def test_k_best_two_job_only_negative(two_job):
    inst, duals = two_job
    cols = k_best_columns(0, inst, duals, 5)
    assert [c.jobs for c in cols] == [(1,)]


def test_k_best_matches_enumeration_top5():
    # Fixture seed chosen so the five best subsets have distinct total
    # processing times; the per-t candidate states then cover all of them.
    seed = 6
    inst = generate_uniform(1, 8, seed)
    duals = random_duals(seed, 8, 1, pi_range=(-50.0, 250.0), sigma_range=(-5.0, -5.0))

    import itertools

    from cgsched import make_column

    expected = sorted(
        rc
        for r in range(1, 9)
        for combo in itertools.combinations(range(1, 9), r)
        if (rc := reduced_cost(make_column(0, combo, inst), duals)) < -1e-6
    )[:5]
    cols = k_best_columns(0, inst, duals, 5)
    got = [reduced_cost(c, duals) for c in cols]
    assert len(got) == 5
    assert got == pytest.approx(expected, abs=1e-9)


def test_k_best_properties():
    for seed in range(12):
        inst = generate_uniform(2, 9, 70 + seed)
        duals = random_duals(seed, 9, 2)
        for k in range(2):
            cols = k_best_columns(k, inst, duals, 5)
            rcs = [reduced_cost(c, duals) for c in cols]
            assert all(rc < -1e-6 for rc in rcs)
            assert rcs == sorted(rcs)
            assert len({c.job_set for c in cols}) == len(cols)
            best = solve_pricing_dp(k, inst, duals)
            if best.column is not None:
                assert cols and cols[0] == best.column
            else:
                assert cols == []


def test_brute_force_empty_duals():
    inst = generate_uniform(1, 5, 3)
    duals = DualSolution(pi=np.full(5, 1e-9), sigma=np.array([-2.0]))
    res = brute_force_pricing(0, inst, duals)
    assert res.min_reduced_cost == pytest.approx(2.0)
    assert res.column is None


def test_brute_force_size_guard():
    inst = generate_uniform(1, 23, 0)
    duals = DualSolution(pi=np.zeros(23), sigma=np.array([0.0]))
    with pytest.raises(PricingSizeError):
        brute_force_pricing(0, inst, duals)


def test_table_dimensions():
    inst = generate_uniform(1, 7, 8)
    _, p, w, ids = _dp_inputs(0, inst)
    pi = np.zeros(7)
    table = _fill_table(p, w, pi)
    assert table.shape == (7 + 1, int(p.sum()) + 1)
    assert np.all(table[0] == 0.0)
    # Skipping a job is always allowed: rows weakly improve.
    assert np.all(table[1:] <= table[:-1] + 1e-12)


def test_runtime_scales_with_rows():
    # Same total time horizon, twice the jobs: work should grow roughly
    # linearly (generous factor to keep timing noise harmless).
    duals16 = DualSolution(pi=np.zeros(16), sigma=np.array([0.0]))
    duals32 = DualSolution(pi=np.zeros(32), sigma=np.array([0.0]))
    small = make_instance([1] * 16, [(16,)] * 16)
    large = make_instance([1] * 32, [(8,)] * 32)

    def clock(fn, *args):
        best = float("inf")
        for _ in range(3):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        return best

    t_small = clock(solve_pricing_dp, 0, small, duals16)
    t_large = clock(solve_pricing_dp, 0, large, duals32)
    assert t_large < 10 * max(t_small, 1e-4)
