"""Exact single-machine pricing.

The table recursion minimizes, over subsets of jobs in SWPT order completing
at time t, the schedule cost minus the collected job duals:

    F(j, t) = min( F(j-1, t - p_j) + t*w_j - pi_j,  F(j-1, t) )

with F(0, t) = 0 for t >= 0 and F(j, t) = +inf for t < 0. The machine dual is
subtracted once at the end, so a column prices out when min F - sigma < -eps.
Subset enumeration (`brute_force_pricing`) is kept here as the test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PricingSizeError
from .instance import Instance
from .schedule import Column, DualSolution, make_column, swpt_sort

DEFAULT_EPSILON = 1e-6

BRUTE_FORCE_MAX_JOBS = 22
_BRUTE_CHUNK = 1 << 16


@dataclass
class PricingResult:
    min_reduced_cost: float
    column: Column | None
    certificate: tuple[int, int]  # (SWPT position j*, completion time t*)


def _dp_inputs(machine: int, instance: Instance):
    ordered = swpt_sort(instance.jobs, machine)
    p = np.array([j.proc_times[machine] for j in ordered], dtype=np.int64)
    w = np.array([j.weight for j in ordered], dtype=np.int64)
    ids = np.array([j.id for j in ordered], dtype=np.int64)
    return ordered, p, w, ids


def _fill_table(p: np.ndarray, w: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """(n+1) x (P+1) table of F values; row j covers the first j SWPT jobs."""
    n = len(p)
    total = int(p.sum())
    ts = np.arange(total + 1, dtype=np.float64)
    F = np.empty((n + 1, total + 1), dtype=np.float64)
    F[0] = 0.0
    for j in range(1, n + 1):
        pj = int(p[j - 1])
        take = F[j - 1, : total + 1 - pj] + ts[pj:] * float(w[j - 1]) - pi[j - 1]
        F[j] = F[j - 1]
        F[j, pj:] = np.minimum(F[j - 1, pj:], take)
    return F


def _backtrack(F: np.ndarray, p: np.ndarray, j_star: int, t_star: int) -> list[int]:
    """SWPT positions of the jobs in the optimal state, skip-branch preferred."""
    positions: list[int] = []
    j, t = j_star, t_star
    while j > 0:
        if F[j, t] == F[j - 1, t]:
            j -= 1
        else:
            positions.append(j)
            t -= int(p[j - 1])
            j -= 1
    return positions[::-1]


def solve_pricing_dp(
    machine: int,
    instance: Instance,
    duals: DualSolution,
    epsilon: float = DEFAULT_EPSILON,
) -> PricingResult:
    """Most negative reduced-cost schedule on the machine, or proof none < -eps."""
    _, p, w, ids = _dp_inputs(machine, instance)
    pi = np.asarray(duals.pi, dtype=np.float64)[ids - 1]
    F = _fill_table(p, w, pi)
    n = len(p)
    # Row n dominates every other row, so its minimum is the global one.
    t_star = int(np.argmin(F[n]))
    v_star = float(F[n, t_star])
    j_star = int(np.argmax(F[:, t_star] == v_star))  # smallest j attaining it
    min_rc = v_star - float(duals.sigma[machine])
    column = None
    if min_rc < -epsilon:
        positions = _backtrack(F, p, j_star, t_star)
        column = make_column(machine, [int(ids[pos - 1]) for pos in positions], instance)
    return PricingResult(min_reduced_cost=min_rc, column=column, certificate=(j_star, t_star))


def k_best_columns(
    machine: int,
    instance: Instance,
    duals: DualSolution,
    k: int,
    epsilon: float = DEFAULT_EPSILON,
) -> list[Column]:
    """Up to k distinct columns with reduced cost < -eps, best first.

    Candidate states are the per-completion-time minima F(n, t); the k most
    negative are backtracked and deduplicated by job set. One table pass
    therefore yields several columns, as the multi-column variants need.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _, p, w, ids = _dp_inputs(machine, instance)
    pi = np.asarray(duals.pi, dtype=np.float64)[ids - 1]
    F = _fill_table(p, w, pi)
    n = len(p)
    sigma = float(duals.sigma[machine])
    terminal = F[n]
    order = np.argsort(terminal, kind="stable")
    seen: set[frozenset[int]] = set()
    found: list[tuple[float, int, Column]] = []
    for rank, t in enumerate(int(t) for t in order):
        if float(terminal[t]) - sigma >= -epsilon:
            break
        positions = _backtrack(F, p, n, t)
        job_ids = frozenset(int(ids[pos - 1]) for pos in positions)
        if not job_ids or job_ids in seen:
            continue
        seen.add(job_ids)
        col = make_column(machine, job_ids, instance)
        pi_sum = float(np.sum(pi[[pos - 1 for pos in positions]]))
        found.append((float(col.cost) - pi_sum - sigma, rank, col))
        if len(found) == k:
            break
    found.sort(key=lambda item: (item[0], item[1]))
    return [col for _, _, col in found]


def brute_force_pricing(machine: int, instance: Instance, duals: DualSolution) -> PricingResult:
    """Exact pricing by enumerating all 2^n subsets; the oracle for the DP."""
    n = instance.num_jobs
    if n > BRUTE_FORCE_MAX_JOBS:
        raise PricingSizeError(
            f"brute-force pricing limited to {BRUTE_FORCE_MAX_JOBS} jobs, got {n}"
        )
    _, p, w, ids = _dp_inputs(machine, instance)
    pi = np.asarray(duals.pi, dtype=np.float64)[ids - 1]
    sigma = float(duals.sigma[machine])
    pf = p.astype(np.float64)
    wf = w.astype(np.float64)

    best_rc = -sigma  # empty schedule
    best_mask = 0
    for start in range(0, 1 << n, _BRUTE_CHUNK):
        stop = min(start + _BRUTE_CHUNK, 1 << n)
        masks = np.arange(start, stop, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
        completions = np.cumsum(bits * pf, axis=1)
        costs = np.sum(bits * wf * completions, axis=1)
        rcs = costs - bits @ pi - sigma
        i = int(np.argmin(rcs))
        if float(rcs[i]) < best_rc:
            best_rc = float(rcs[i])
            best_mask = int(masks[i])

    positions = [j + 1 for j in range(n) if best_mask >> j & 1]
    t_star = int(sum(int(p[pos - 1]) for pos in positions))
    j_star = positions[-1] if positions else 0
    column = None
    if positions:
        column = make_column(machine, [int(ids[pos - 1]) for pos in positions], instance)
    return PricingResult(min_reduced_cost=best_rc, column=column, certificate=(j_star, t_star))
