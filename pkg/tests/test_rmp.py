import itertools

import numpy as np
import pytest

from cgsched import (
    ColumnPool,
    ensure_feasible,
    finalize_integer,
    generate_uniform,
    make_column,
    reduced_cost,
    solve_lp,
)
from cgsched.errors import InvariantViolation
from cgsched.instance import role_rng
from cgsched.rmp import DUAL_TOL, STATUS_INFEASIBLE, STATUS_OPTIMAL

from conftest import enumerate_integer_over_pool, enumerate_lp_vertices, make_instance


def test_pool_dedup(tiny_instance):
    pool = ColumnPool()
    a = make_column(0, [1], tiny_instance)
    assert pool.add_columns([a, a]) == 1
    assert pool.add(a) is False
    assert len(pool) == 1


def test_pool_key_includes_machine():
    inst = make_instance([2, 3], [(1, 2), (4, 1)])
    pool = ColumnPool()
    added = pool.add_columns(
        [make_column(0, [1, 2], inst), make_column(1, [1, 2], inst)]
    )
    assert added == 2


def test_ensure_feasible_counts():
    inst = generate_uniform(2, 20, 1)
    pool = ColumnPool()
    assert ensure_feasible(pool, inst) == 20
    assert ensure_feasible(pool, inst) == 0


def test_ensure_feasible_argmin_machine():
    inst = make_instance([5], [(3, 2)])
    pool = ColumnPool()
    ensure_feasible(pool, inst)
    assert pool.columns[0].machine == 1  # 5*2 < 5*3


def test_solve_lp_single_job():
    inst = make_instance([1], [(5,)])
    pool = ColumnPool()
    pool.add(make_column(0, [1], inst))
    sol = solve_lp(pool, inst)
    assert sol.status == STATUS_OPTIMAL
    assert sol.objective == pytest.approx(5.0)
    assert sol.y[0] == pytest.approx(1.0)


def test_solve_lp_picks_cheaper_cover():
    # Same job set on two machines with different costs: cost 3 wins.
    inst = make_instance([1], [(5, 3)])
    pool = ColumnPool()
    pool.add(make_column(0, [1], inst))
    pool.add(make_column(1, [1], inst))
    sol = solve_lp(pool, inst)
    assert sol.objective == pytest.approx(3.0)


def test_solve_lp_uncovered_job_infeasible():
    inst = make_instance([1, 1], [(2,), (3,)])
    pool = ColumnPool()
    pool.add(make_column(0, [1], inst))
    assert solve_lp(pool, inst).status == STATUS_INFEASIBLE


def _random_pool(inst, seed, count):
    rng = role_rng(seed, "test-pool")
    pool = ColumnPool()
    n, m = inst.num_jobs, inst.num_machines
    while len(pool) < count:
        k = int(rng.integers(0, m))
        ids = [j + 1 for j in range(n) if rng.random() < 0.5]
        if ids:
            pool.add(make_column(k, ids, inst))
    return pool


def test_solve_lp_matches_vertex_enumeration():
    # Random 3-job, 2-machine pools of 8 columns against the basic-solution
    # enumeration oracle (skipping pools where the LP itself is infeasible).
    checked = 0
    for seed in range(20):
        inst = generate_uniform(2, 3, 300 + seed)
        pool = _random_pool(inst, seed, 8)
        expected = enumerate_lp_vertices(pool, inst)
        sol = solve_lp(pool, inst)
        if expected == float("inf"):
            assert sol.status == STATUS_INFEASIBLE
            continue
        assert sol.status == STATUS_OPTIMAL
        assert sol.objective == pytest.approx(expected, abs=1e-6)
        checked += 1
    assert checked >= 10


def _check_optimality_conditions(pool, inst, sol):
    for s, col in enumerate(pool.columns):
        rc = reduced_cost(col, sol.duals)
        assert rc >= -DUAL_TOL
        if sol.y[s] > 1e-9:
            assert abs(rc) <= DUAL_TOL
    assert np.all(sol.duals.sigma <= 1e-9)
    # Primal feasibility of the reported y.
    for j in range(1, inst.num_jobs + 1):
        cover = sum(sol.y[s] for s, col in enumerate(pool.columns) if j in col.job_set)
        assert cover == pytest.approx(1.0, abs=1e-6)
    for k in range(inst.num_machines):
        usage = sum(sol.y[s] for s, col in enumerate(pool.columns) if col.machine == k)
        assert usage <= 1 + 1e-6
    recomputed = sum(col.cost * sol.y[s] for s, col in enumerate(pool.columns))
    assert recomputed == pytest.approx(sol.objective, abs=1e-6)


def test_dual_feasibility_and_complementary_slackness():
    for seed in range(8):
        inst = generate_uniform(2, 6, 400 + seed)
        pool = _random_pool(inst, seed, 14)
        ensure_feasible(pool, inst)
        pool.add(make_column(0, list(range(1, 7)), inst))  # partition fallback
        sol = solve_lp(pool, inst)
        assert sol.status == STATUS_OPTIMAL
        _check_optimality_conditions(pool, inst, sol)


def test_objective_never_increases_with_new_column():
    inst = generate_uniform(2, 6, 5)
    pool = ColumnPool()
    pool.add(make_column(0, [1, 2, 3], inst))
    pool.add(make_column(1, [4, 5, 6], inst))
    ensure_feasible(pool, inst)
    before = solve_lp(pool, inst)
    from cgsched import solve_pricing_dp

    res = solve_pricing_dp(0, inst, before.duals)
    if res.column is not None:
        pool.add(res.column)
        after = solve_lp(pool, inst)
        assert after.objective <= before.objective + 1e-9


def test_warm_start_matches_cold_start():
    inst = generate_uniform(2, 6, 6)
    pool = ColumnPool()
    pool.add(make_column(0, [1, 2, 3], inst))
    pool.add(make_column(1, [4, 5, 6], inst))
    ensure_feasible(pool, inst)
    first = solve_lp(pool, inst)
    pool.add(make_column(0, [1, 4], inst))
    pool.add(make_column(1, [2, 5], inst))
    warm = solve_lp(pool, inst, start_basis=first.basis)
    cold = solve_lp(pool, inst)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)
    _check_optimality_conditions(pool, inst, warm)


def _full_pool(inst):
    pool = ColumnPool()
    n = inst.num_jobs
    for k in range(inst.num_machines):
        for r in range(1, n + 1):
            for combo in itertools.combinations(range(1, n + 1), r):
                pool.add(make_column(k, combo, inst))
    return pool


def test_finalize_integer_matches_enumeration():
    inst = generate_uniform(2, 6, 17)
    pool = _full_pool(inst)
    lp = solve_lp(pool, inst)
    result = finalize_integer(pool, inst)
    assert result.optimal
    expected = enumerate_integer_over_pool(pool, inst)
    assert result.objective == expected
    assert result.objective >= lp.objective - 1e-6


def test_finalize_integer_returns_lp_when_integral():
    inst = make_instance([2, 3], [(2, 9), (9, 3)])
    pool = ColumnPool()
    pool.add(make_column(0, [1], inst))
    pool.add(make_column(1, [2], inst))
    lp = solve_lp(pool, inst)
    assert np.allclose(np.sort(lp.y), [1.0, 1.0])
    result = finalize_integer(pool, inst)
    assert result.objective == pytest.approx(lp.objective)
    assert {c.key() for c in result.chosen} == {c.key() for c in pool.columns}


def test_finalize_integer_bound_and_partition():
    for seed in (21, 22, 23):
        inst = generate_uniform(2, 5, seed)
        pool = _random_pool(inst, seed, 10)
        ensure_feasible(pool, inst)
        pool.add(make_column(0, [1, 2, 3, 4, 5], inst))
        lp = solve_lp(pool, inst)
        result = finalize_integer(pool, inst)
        assert result.objective >= lp.objective - 1e-6
        covered = sorted(j for col in result.chosen for j in col.jobs)
        assert covered == list(range(1, 6))
        machines = [col.machine for col in result.chosen]
        assert len(set(machines)) == len(machines)


def test_finalize_integer_time_limit_zero():
    inst = generate_uniform(2, 5, 30)
    pool = _full_pool(inst)
    with pytest.raises(InvariantViolation, match="time limit"):
        finalize_integer(pool, inst, time_limit=0.0)
