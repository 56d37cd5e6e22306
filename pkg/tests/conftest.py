"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from cgsched import DualSolution, Instance, make_column
from cgsched.instance import Job, role_rng


@pytest.fixture
def tiny_instance() -> Instance:
    # Two jobs whose SWPT order on machine 0 is job1 then job2 (2/3 < 3/1).
    return Instance(
        name="tiny",
        num_machines=1,
        jobs=(Job(1, 3, (2,)), Job(2, 1, (3,))),
    )


def make_instance(weights, procs, m=None) -> Instance:
    """Hand-built instance; procs is a list of per-machine tuples per job."""
    m = m if m is not None else len(procs[0])
    jobs = tuple(
        Job(i + 1, int(w), tuple(int(p) for p in ps))
        for i, (w, ps) in enumerate(zip(weights, procs))
    )
    return Instance(name="custom", num_machines=m, jobs=jobs)


def random_duals(seed: int, n: int, m: int,
                 pi_range=(-200.0, 200.0), sigma_range=(-50.0, 0.0)) -> DualSolution:
    rng = role_rng(seed, "test-duals")
    return DualSolution(
        pi=rng.uniform(*pi_range, size=n),
        sigma=rng.uniform(*sigma_range, size=m),
    )


def sequence_cost(instance: Instance, machine: int, ordered_ids: list[int]) -> int:
    """Total weighted completion time of a job sequence taken as given."""
    t = 0
    cost = 0
    for jid in ordered_ids:
        job = instance.job(jid)
        t += job.proc_times[machine]
        cost += job.weight * t
    return cost


def enumerate_pricing(instance: Instance, machine: int, duals: DualSolution):
    """(min reduced cost, best job set) over every subset, independent of the DP."""
    n = instance.num_jobs
    best = (-float(duals.sigma[machine]), frozenset())
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(1, n + 1), r):
            col = make_column(machine, combo, instance)
            rc = (
                float(col.cost)
                - float(np.sum(duals.pi[[j - 1 for j in combo]]))
                - float(duals.sigma[machine])
            )
            if rc < best[0]:
                best = (rc, frozenset(combo))
    return best


def enumerate_lp_vertices(pool, instance) -> float:
    """Minimum objective over all feasible basic solutions of the master LP.

    Enumerates every row-count-sized column subset of [pool columns | slacks],
    solves the square system, and keeps feasible vertices. Exponential, so for
    tiny pools only.
    """
    n, m = instance.num_jobs, instance.num_machines
    rows = n + m
    num = len(pool.columns)
    A = np.zeros((rows, num + m))
    c = np.zeros(num + m)
    for s, col in enumerate(pool.columns):
        for jid in col.jobs:
            A[jid - 1, s] = 1.0
        A[n + col.machine, s] = 1.0
        c[s] = float(col.cost)
    for k in range(m):
        A[n + k, num + k] = 1.0
    b = np.ones(rows)
    best = float("inf")
    for combo in itertools.combinations(range(num + m), rows):
        B = A[:, combo]
        if abs(np.linalg.det(B)) < 1e-9:
            continue
        x = np.linalg.solve(B, b)
        if np.all(x >= -1e-9):
            best = min(best, float(c[list(combo)] @ x))
    return best


def enumerate_integer_over_pool(pool, instance) -> int | None:
    """Cheapest selection of at most one pool column per machine that
    partitions the jobs; None when the pool admits no partition."""
    per_machine: list[list] = [[] for _ in range(instance.num_machines)]
    for col in pool.columns:
        if col.jobs:
            per_machine[col.machine].append(col)
    for k in range(instance.num_machines):
        per_machine[k].append(None)
    all_jobs = frozenset(range(1, instance.num_jobs + 1))
    best = None
    for choice in itertools.product(*per_machine):
        chosen = [col for col in choice if col is not None]
        union: set[int] = set()
        size = 0
        for col in chosen:
            union.update(col.jobs)
            size += len(col.jobs)
        if size == len(all_jobs) and union == all_jobs:
            total = sum(col.cost for col in chosen)
            if best is None or total < best:
                best = total
    return best


def enumerate_assignments(instance: Instance) -> int:
    """Exact optimum over all job-to-machine assignments (SWPT per machine)."""
    n, m = instance.num_jobs, instance.num_machines
    best = None
    for assign in itertools.product(range(m), repeat=n):
        total = 0
        for k in range(m):
            ids = [j + 1 for j in range(n) if assign[j] == k]
            if ids:
                total += make_column(k, ids, instance).cost
        if best is None or total < best:
            best = total
    return best
