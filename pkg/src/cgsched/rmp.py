"""Restricted master problem: column pool, LP relaxation, integer finalization.

The LP is the set-partitioning relaxation

    min  sum f_s y_s
    s.t. sum_{s covering j} y_s = 1              for every job j     (duals pi_j)
         sum_{s on machine k} y_s + slack_k = 1  for every machine k (duals sigma_k)
         y, slack >= 0

solved by a self-contained two-phase revised primal simplex. The problem has
only n+m rows, so a dense implementation with a fresh factorization per pivot
is both adequate and numerically clean; duals come straight from the final
basis. Bland's rule engages after a run of degenerate pivots to rule out
cycling. Standard-form column layout: machine slacks first, then pool columns
(so pool positions stay valid as columns are appended), then the phase-1
artificials for the job rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .instance import Instance
from .schedule import Column, DualSolution, make_column

FEAS_TOL = 1e-9
DUAL_TOL = 1e-6
_PIVOT_TOL = 1e-9
_DEGENERATE_LIMIT = 500
_MAX_PIVOTS = 100_000

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"


class ColumnPool:
    """Deduplicated, append-only store of columns, keyed by (machine, job set)."""

    def __init__(self) -> None:
        self.columns: list[Column] = []
        self._index: dict[tuple[int, frozenset[int]], int] = {}

    def __len__(self) -> int:
        return len(self.columns)

    def __contains__(self, col: Column) -> bool:
        return col.key() in self._index

    def add(self, col: Column) -> bool:
        key = col.key()
        if key in self._index:
            return False
        self._index[key] = len(self.columns)
        self.columns.append(col)
        return True

    def add_columns(self, cols: list[Column]) -> int:
        return sum(1 for col in cols if self.add(col))

    def position(self, col: Column) -> int | None:
        return self._index.get(col.key())


def ensure_feasible(pool: ColumnPool, instance: Instance) -> int:
    """Add, per job, the singleton column on its cheapest machine (argmin w*p)."""
    added = 0
    for job in instance.jobs:
        best_k = min(
            range(instance.num_machines), key=lambda k: (job.weight * job.proc_times[k], k)
        )
        if pool.add(make_column(best_k, [job.id], instance)):
            added += 1
    return added


@dataclass
class RmpSolution:
    y: np.ndarray
    objective: float
    duals: DualSolution
    status: str
    basis: list[int] = field(default_factory=list)  # standard-form basis, for warm starts


def _standard_form(pool: ColumnPool, instance: Instance):
    """A (rows x cols), b, c with slack columns 0..m-1 and pool columns after."""
    n, m = instance.num_jobs, instance.num_machines
    rows = n + m
    cols = m + len(pool.columns)
    A = np.zeros((rows, cols), dtype=np.float64)
    c = np.zeros(cols, dtype=np.float64)
    for k in range(m):
        A[n + k, k] = 1.0
    for s, col in enumerate(pool.columns):
        for jid in col.jobs:
            A[jid - 1, m + s] = 1.0
        A[n + col.machine, m + s] = 1.0
        c[m + s] = float(col.cost)
    b = np.ones(rows, dtype=np.float64)
    return A, b, c


def _simplex(A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int],
             forbid: frozenset[int] = frozenset()):
    """Primal simplex from a feasible basis; returns (x_B, duals, basis).

    Each iteration refactorizes the basis matrix, so the returned primal and
    dual values carry no accumulated pivot error. Columns in `forbid` never
    enter the basis (used to pin phase-1 artificials stuck on redundant rows).
    """
    degenerate_run = 0
    bland = False
    for _ in range(_MAX_PIVOTS):
        B = A[:, basis]
        x_b = np.linalg.solve(B, b)
        lam = np.linalg.solve(B.T, c[basis])
        reduced = c - lam @ A
        reduced[basis] = 0.0
        if forbid:
            reduced[list(forbid)] = 0.0
        candidates = np.flatnonzero(reduced < -_PIVOT_TOL)
        if candidates.size == 0:
            return x_b, lam, basis
        if bland:
            enter = int(candidates[0])
        else:
            enter = int(candidates[np.argmin(reduced[candidates])])
        direction = np.linalg.solve(B, A[:, enter])
        move = np.flatnonzero(direction > _PIVOT_TOL)
        if move.size == 0:
            raise InvariantViolation("LP unbounded; master problem rows are corrupt")
        ratios = x_b[move] / direction[move]
        theta = float(np.min(ratios))
        ties = move[np.flatnonzero(ratios <= theta + FEAS_TOL)]
        if bland:
            leave_row = int(min(ties, key=lambda i: basis[i]))
        else:
            leave_row = int(ties[np.argmax(direction[ties])])
        if theta <= FEAS_TOL:
            degenerate_run += 1
            if degenerate_run > _DEGENERATE_LIMIT:
                bland = True
        else:
            degenerate_run = 0
        basis[leave_row] = enter
    raise InvariantViolation("simplex pivot limit exceeded")


def _two_phase(A: np.ndarray, b: np.ndarray, c: np.ndarray, job_rows: int, slack_cols: int):
    """Two-phase solve; returns (x, objective, duals, basis) or None if infeasible.

    Artificials are placed on the job rows only; the slack columns already
    supply a feasible start for the machine rows. Artificials that cannot be
    driven out sit on redundant rows and are pinned at zero for phase 2.
    """
    rows, cols = A.shape
    art = np.zeros((rows, job_rows), dtype=np.float64)
    art[:job_rows, :] = np.eye(job_rows)
    A1 = np.hstack([A, art])
    c1 = np.zeros(cols + job_rows, dtype=np.float64)
    c1[cols:] = 1.0
    basis = [cols + j for j in range(job_rows)] + list(range(slack_cols))
    x_b, _, basis = _simplex(A1, b, c1, basis)
    if sum(float(x_b[i]) for i, s in enumerate(basis) if s >= cols) > 1e-7:
        return None
    for pos in range(rows):
        if basis[pos] < cols:
            continue
        B = A1[:, basis]
        e = np.zeros(rows)
        e[pos] = 1.0
        row = np.linalg.solve(B.T, e) @ A
        in_basis = set(basis)
        choices = [j for j in np.flatnonzero(np.abs(row) > 1e-7) if j not in in_basis]
        if choices:
            basis[pos] = int(choices[0])
    c2 = np.concatenate([c, np.zeros(job_rows)])
    forbid = frozenset(range(cols, cols + job_rows))
    x_b, lam, basis = _simplex(A1, b, c2, basis, forbid=forbid)
    x = np.zeros(cols)
    for i, s in enumerate(basis):
        if s < cols:
            x[s] = max(float(x_b[i]), 0.0)
    return x, float(c @ x), lam, basis


def solve_lp(
    pool: ColumnPool, instance: Instance, start_basis: list[int] | None = None
) -> RmpSolution:
    """Optimal basic solution of the restricted master LP, with duals.

    `start_basis` (from a previous solve of the same, since-extended pool)
    skips phase 1; it stays primal-feasible because columns are append-only.
    """
    n, m = instance.num_jobs, instance.num_machines
    covered: set[int] = set()
    for col in pool.columns:
        covered.update(col.jobs)
    infeasible = RmpSolution(
        y=np.zeros(len(pool.columns)),
        objective=float("nan"),
        duals=DualSolution(pi=np.zeros(n), sigma=np.zeros(m)),
        status=STATUS_INFEASIBLE,
    )
    if len(covered) < n:
        return infeasible

    A, b, c = _standard_form(pool, instance)
    if start_basis and _basis_is_feasible(A, b, start_basis):
        x_b, lam, basis = _simplex(A, b, c, list(start_basis))
        x = np.zeros(A.shape[1])
        x[basis] = np.maximum(x_b, 0.0)
        objective = float(c @ x)
    else:
        solved = _two_phase(A, b, c, job_rows=n, slack_cols=m)
        if solved is None:
            return infeasible
        x, objective, lam, basis = solved
    return RmpSolution(
        y=x[m:],
        objective=objective,
        duals=DualSolution(pi=lam[:n].copy(), sigma=np.minimum(lam[n:], 0.0)),
        status=STATUS_OPTIMAL,
        basis=basis,
    )


def _basis_is_feasible(A: np.ndarray, b: np.ndarray, basis: list[int]) -> bool:
    if len(set(basis)) != A.shape[0] or max(basis, default=-1) >= A.shape[1]:
        return False
    try:
        x_b = np.linalg.solve(A[:, basis], b)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(x_b >= -FEAS_TOL))


@dataclass
class IntegerSolution:
    chosen: list[Column]
    objective: int
    optimal: bool  # False when the time limit cut the search short

    def machines_used(self) -> set[int]:
        return {col.machine for col in self.chosen}


def _restricted_lp(pool, instance, allowed, fixed_jobs, fixed_machines):
    """LP over `allowed` pool positions with some jobs/machines already used.

    Returns (objective, y dict over allowed positions) or None when the
    remaining jobs cannot all be covered.
    """
    n, m = instance.num_jobs, instance.num_machines
    free_jobs = [j for j in range(1, n + 1) if j not in fixed_jobs]
    free_machines = [k for k in range(m) if k not in fixed_machines]
    if not free_jobs:
        return 0.0, {}
    job_row = {j: i for i, j in enumerate(free_jobs)}
    mach_row = {k: len(free_jobs) + i for i, k in enumerate(free_machines)}
    usable = [
        s
        for s in allowed
        if pool.columns[s].machine in mach_row
        and not (pool.columns[s].job_set & fixed_jobs)
    ]
    covered: set[int] = set()
    for s in usable:
        covered.update(pool.columns[s].jobs)
    if any(j not in covered for j in free_jobs):
        return None
    rows = len(free_jobs) + len(free_machines)
    slacks = len(free_machines)
    A = np.zeros((rows, slacks + len(usable)))
    c = np.zeros(slacks + len(usable))
    for i in range(slacks):
        A[len(free_jobs) + i, i] = 1.0
    for idx, s in enumerate(usable):
        col = pool.columns[s]
        for jid in col.jobs:
            A[job_row[jid], slacks + idx] = 1.0
        A[mach_row[col.machine], slacks + idx] = 1.0
        c[slacks + idx] = float(col.cost)
    b = np.ones(rows)
    solved = _two_phase(A, b, c, job_rows=len(free_jobs), slack_cols=slacks)
    if solved is None:
        return None
    x, objective, _, _ = solved
    y = {s: float(x[slacks + idx]) for idx, s in enumerate(usable) if x[slacks + idx] > FEAS_TOL}
    return objective, y


def finalize_integer(
    pool: ColumnPool, instance: Instance, time_limit: float | None = None
) -> IntegerSolution:
    """Best partition of the jobs into pool columns (at most one per machine).

    Depth-first branch and bound on the most fractional column value, taking
    the y=1 branch first and pruning with LP relaxations of the residual
    problem. Exact over the pool unless the time limit fires.
    """
    deadline = time.perf_counter() + time_limit if time_limit is not None else None
    best_cost = float("inf")
    best_choice: list[int] = []
    timed_out = False

    root = (frozenset(range(len(pool.columns))), [], frozenset(), frozenset(), 0)
    stack = [root]
    while stack:
        if deadline is not None and time.perf_counter() > deadline:
            timed_out = True
            break
        allowed, fixed, fixed_jobs, fixed_machines, fixed_cost = stack.pop()
        solved = _restricted_lp(pool, instance, allowed, fixed_jobs, fixed_machines)
        if solved is None:
            continue
        lp_obj, y = solved
        if fixed_cost + lp_obj >= best_cost - 1e-6:
            continue
        fractional = {s: v for s, v in y.items() if 1e-6 < v < 1.0 - 1e-6}
        if not fractional:
            chosen = fixed + [s for s, v in y.items() if v > 0.5]
            total = fixed_cost + int(round(lp_obj))
            if total < best_cost:
                best_cost = total
                best_choice = chosen
            continue
        branch = max(fractional, key=lambda s: min(fractional[s], 1.0 - fractional[s]))
        col = pool.columns[branch]
        # LIFO: push the y=0 child first so the y=1 branch is explored first.
        stack.append((allowed - {branch}, fixed, fixed_jobs, fixed_machines, fixed_cost))
        stack.append(
            (
                allowed - {branch},
                fixed + [branch],
                fixed_jobs | col.job_set,
                fixed_machines | {col.machine},
                fixed_cost + col.cost,
            )
        )

    if best_cost == float("inf"):
        raise InvariantViolation(
            "no integer partition found over the pool"
            + (" before the time limit" if timed_out else "")
        )
    chosen = [pool.columns[s] for s in best_choice if pool.columns[s].jobs]
    _check_partition(chosen, instance)
    return IntegerSolution(
        chosen=chosen,
        objective=int(sum(col.cost for col in chosen)),
        optimal=not timed_out,
    )


def _check_partition(chosen: list[Column], instance: Instance) -> None:
    seen: set[int] = set()
    machines: set[int] = set()
    for col in chosen:
        if col.machine in machines:
            raise InvariantViolation("two columns selected on one machine")
        machines.add(col.machine)
        for jid in col.jobs:
            if jid in seen:
                raise InvariantViolation(f"job {jid} covered twice")
            seen.add(jid)
    if len(seen) != instance.num_jobs:
        raise InvariantViolation("integer solution leaves jobs uncovered")
