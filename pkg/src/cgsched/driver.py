"""Column-generation driver.

Four pricing modes share one loop:

  greedy-dp  one most-negative DP column per machine per iteration
  dp-K       the K most negative distinct DP columns per machine
  nn-dp      one predicted column per machine; when no machine contributes a
             new negative column, a full DP pass either rescues the iteration
             or certifies optimality

Termination with a certificate means the last full DP pass found no column
below -epsilon on any machine, so the restricted LP optimum is the LP optimum
of the full master regardless of how good the network's guesses were.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvariantViolation
from .instance import Instance, role_rng
from .nn.config import ModelConfig
from .nn.model import end_token, predict_column, start_token
from .nn.weights_io import ModelWeights
from .pricing import k_best_columns, solve_pricing_dp
from .rmp import ColumnPool, IntegerSolution, ensure_feasible, finalize_integer, solve_lp
from .schedule import Column, DualSolution, make_column, reduced_cost

MODE_GREEDY_DP = "greedy-dp"
MODE_DP_K = "dp-k"
MODE_NN_DP = "nn-dp"

INIT_RANDOM_SUBSETS = "random-subsets"
INIT_GREEDY_PERMUTATION = "greedy-permutation"

TERMINATED_CERTIFICATE = "certificate"
TERMINATED_TIME_LIMIT = "time-limit"

PRICED_BY_NN = "NN"
PRICED_BY_DP = "DP"

LOG_HEADER = ["iteration", "elapsed_ms", "rmp_obj", "pool_size", "cols_nn", "cols_dp", "min_rc", "mode"]

_GREEDY_PERMUTATION_RUNS = 2000
_GREEDY_PERMUTATION_KEEP = 20


@dataclass
class CgConfig:
    mode: str = MODE_GREEDY_DP
    k: int = 1
    epsilon: float = 1e-6
    time_limit: float | None = None
    init: str = INIT_RANDOM_SUBSETS
    runs_per_machine: int = 20
    seed: int = 0
    finalize: bool = False
    finalize_time_limit: float | None = None
    collect_dataset: bool = False

    def __post_init__(self) -> None:
        if self.mode not in (MODE_GREEDY_DP, MODE_DP_K, MODE_NN_DP):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.runs_per_machine < 1:
            raise ValueError("runs_per_machine must be >= 1")

    @classmethod
    def from_solver_string(cls, solver: str, **kwargs) -> "CgConfig":
        """Parse CLI-style solver names: greedy-dp, dp-<K>, nn-dp."""
        if solver == MODE_GREEDY_DP or solver == MODE_NN_DP:
            return cls(mode=solver, **kwargs)
        if solver.startswith("dp-"):
            return cls(mode=MODE_DP_K, k=int(solver[3:]), **kwargs)
        raise ValueError(f"unknown solver {solver!r}")


@dataclass
class IterationRecord:
    iteration: int
    elapsed_ms: float
    rmp_objective: float
    pool_size: int
    nn_count: int
    dp_count: int
    min_reduced_cost: float
    pricing_mode: str


@dataclass
class CgResult:
    lp_objective: float
    integer: IntegerSolution | None
    iterations: list[IterationRecord]
    totals: dict[str, int]
    certificate: list[float] | None
    terminated_by: str
    wall_ms: float
    pool: ColumnPool
    final_duals: DualSolution | None = None
    dataset_records: list[dict] = field(default_factory=list)

    @property
    def integer_objective(self) -> int | None:
        return self.integer.objective if self.integer else None


def init_random_subsets(instance: Instance, runs_per_machine: int, seed: int) -> list[Column]:
    """Per machine, `runs_per_machine` SWPT columns over random job subsets
    (each job included independently with probability 1/2)."""
    if runs_per_machine < 1:
        raise ValueError("runs_per_machine must be >= 1")
    rng = role_rng(seed, "init-subsets")
    cols: list[Column] = []
    for k in range(instance.num_machines):
        picks = rng.random((runs_per_machine, instance.num_jobs)) < 0.5
        for run in range(runs_per_machine):
            ids = [j + 1 for j in range(instance.num_jobs) if picks[run, j]]
            cols.append(make_column(k, ids, instance))
    return cols


def _greedy_assign(instance: Instance, order: np.ndarray) -> tuple[int, list[list[int]]]:
    """Assign jobs in the given order, each to the machine whose SWPT schedule
    grows the least in total weighted completion time."""
    per_machine: list[list] = [[] for _ in range(instance.num_machines)]  # jobs in SWPT order
    total = 0
    for idx in order:
        job = instance.jobs[int(idx)]
        best = None
        for k in range(instance.num_machines):
            delta = _insertion_cost(per_machine[k], job, k)
            if best is None or delta < best[0]:
                best = (delta, k)
        delta, k = best
        _insert_swpt(per_machine[k], job, k)
        total += delta
    return total, [[j.id for j in seq] for seq in per_machine]


def _insertion_cost(seq: list, job, machine: int) -> int:
    """Cost increase from inserting the job at its SWPT position."""
    p_new, w_new = job.proc_times[machine], job.weight
    pos = _swpt_position(seq, job, machine)
    before = sum(j.proc_times[machine] for j in seq[:pos])
    tail_weight = sum(j.weight for j in seq[pos:])
    return w_new * (before + p_new) + p_new * tail_weight


def _swpt_position(seq: list, job, machine: int) -> int:
    p_new, w_new = job.proc_times[machine], job.weight
    for i, other in enumerate(seq):
        lhs = other.proc_times[machine] * w_new
        rhs = p_new * other.weight
        if lhs > rhs or (lhs == rhs and other.id > job.id):
            return i
    return len(seq)


def _insert_swpt(seq: list, job, machine: int) -> None:
    seq.insert(_swpt_position(seq, job, machine), job)


def init_greedy_permutation(instance: Instance, seed: int) -> list[Column]:
    """2000 random-permutation list-scheduling runs; the 20 cheapest complete
    solutions are decomposed into per-machine columns."""
    rng = role_rng(seed, "init-permutation")
    solutions: list[tuple[int, list[list[int]]]] = []
    for _ in range(_GREEDY_PERMUTATION_RUNS):
        order = rng.permutation(instance.num_jobs)
        solutions.append(_greedy_assign(instance, order))
    solutions.sort(key=lambda item: item[0])
    cols: list[Column] = []
    for _, machine_jobs in solutions[:_GREEDY_PERMUTATION_KEEP]:
        for k, ids in enumerate(machine_jobs):
            if ids:
                cols.append(make_column(k, ids, instance))
    return cols


def _initial_columns(instance: Instance, config: CgConfig) -> list[Column]:
    if config.init == INIT_RANDOM_SUBSETS:
        return init_random_subsets(instance, config.runs_per_machine, config.seed)
    if config.init == INIT_GREEDY_PERMUTATION:
        return init_greedy_permutation(instance, config.seed)
    raise ValueError(f"unknown init heuristic {config.init!r}")


def _dataset_records(instance, iteration, duals, dp_columns) -> list[dict]:
    n = instance.num_jobs
    records = []
    for k in range(instance.num_machines):
        col = dp_columns[k]
        if col is None:
            target = None
        else:
            target = [start_token(n), *col.jobs, 0, end_token(n)]
        records.append(
            {
                "instance": instance.name,
                "machine": k,
                "iteration": iteration,
                "sigma": float(duals.sigma[k]),
                "jobs": [
                    {
                        "id": job.id,
                        "p": job.proc_times[k],
                        "w": job.weight,
                        "pi": float(duals.pi[job.id - 1]),
                    }
                    for job in instance.jobs
                ],
                "target": target,
            }
        )
    return records


def run_cg(
    instance: Instance,
    config: CgConfig,
    weights: ModelWeights | None = None,
    model_config: ModelConfig | None = None,
) -> CgResult:
    """Run column generation to a certificate or the time limit."""
    if config.mode == MODE_NN_DP:
        if weights is None:
            raise ValueError("nn-dp mode requires model weights")
        if model_config is None:
            model_config = ModelConfig()
    started = time.perf_counter()
    deadline = started + config.time_limit if config.time_limit is not None else None

    pool = ColumnPool()
    pool.add_columns(_initial_columns(instance, config))
    ensure_feasible(pool, instance)
    _add_seed_partition(pool, instance)
    initial_size = len(pool)

    records: list[IterationRecord] = []
    dataset: list[dict] = []
    certificate: list[float] | None = None
    terminated = TERMINATED_TIME_LIMIT
    basis: list[int] | None = None
    lp_objective = float("nan")
    final_duals: DualSolution | None = None
    iteration = 0

    while True:
        if deadline is not None and time.perf_counter() > deadline:
            terminated = TERMINATED_TIME_LIMIT
            break
        solution = solve_lp(pool, instance, basis)
        if solution.status != "optimal":
            raise InvariantViolation("RMP became infeasible; pool lost coverage")
        basis = solution.basis
        lp_objective = solution.objective
        final_duals = solution.duals
        iteration += 1

        nn_count = 0
        dp_count = 0
        min_rc = float("inf")
        mode_used = PRICED_BY_DP
        dp_min_rcs: list[float] | None = None

        run_dp = True
        if config.mode == MODE_NN_DP:
            mode_used = PRICED_BY_NN
            for k in range(instance.num_machines):
                predicted = predict_column(k, instance, duals=solution.duals,
                                           weights=weights, config=model_config)
                if predicted is None:
                    continue
                col, rc = predicted
                min_rc = min(min_rc, rc)
                if rc < -config.epsilon and pool.add(col):
                    nn_count += 1
            run_dp = nn_count == 0
            if run_dp:
                mode_used = PRICED_BY_DP

        if run_dp:
            dp_min_rcs = []
            dp_columns: list[Column | None] = []
            for k in range(instance.num_machines):
                if config.mode == MODE_DP_K:
                    cols = k_best_columns(k, instance, solution.duals, config.k, config.epsilon)
                    if cols:
                        added = pool.add_columns(cols)
                        if added == 0:
                            raise InvariantViolation(
                                "DP repriced only columns already in the pool"
                            )
                        dp_count += added
                        dp_min_rcs.append(reduced_cost(cols[0], solution.duals))
                        dp_columns.append(cols[0])
                    else:
                        res = solve_pricing_dp(k, instance, solution.duals, config.epsilon)
                        dp_min_rcs.append(res.min_reduced_cost)
                        dp_columns.append(None)
                else:
                    res = solve_pricing_dp(k, instance, solution.duals, config.epsilon)
                    dp_min_rcs.append(res.min_reduced_cost)
                    dp_columns.append(res.column)
                    if res.column is not None and not pool.add(res.column):
                        raise InvariantViolation(
                            "DP repriced a column already in the pool; duals are inconsistent"
                        )
                    if res.column is not None:
                        dp_count += 1
            min_rc = min(min_rc, min(dp_min_rcs))
            if config.collect_dataset and config.mode == MODE_GREEDY_DP:
                dataset.extend(_dataset_records(instance, iteration, solution.duals, dp_columns))

        records.append(
            IterationRecord(
                iteration=iteration,
                elapsed_ms=(time.perf_counter() - started) * 1000.0,
                rmp_objective=solution.objective,
                pool_size=len(pool),
                nn_count=nn_count,
                dp_count=dp_count,
                min_reduced_cost=min_rc,
                pricing_mode=mode_used,
            )
        )

        if run_dp and dp_count == 0:
            certificate = dp_min_rcs
            terminated = TERMINATED_CERTIFICATE
            break

    integer: IntegerSolution | None = None
    if config.finalize and terminated == TERMINATED_CERTIFICATE:
        integer = finalize_integer(pool, instance, config.finalize_time_limit)

    totals_nn = sum(r.nn_count for r in records)
    totals_dp = sum(r.dp_count for r in records)
    return CgResult(
        lp_objective=lp_objective,
        integer=integer,
        iterations=records,
        totals={"total": totals_nn + totals_dp, "nn": totals_nn, "dp": totals_dp,
                "initial": initial_size},
        certificate=certificate,
        terminated_by=terminated,
        wall_ms=(time.perf_counter() - started) * 1000.0,
        pool=pool,
        final_duals=final_duals,
        dataset_records=dataset,
    )


def _add_seed_partition(pool: ColumnPool, instance: Instance) -> None:
    """Guarantee one full job partition among the pool columns.

    A machine holds at most one schedule, so singleton columns alone leave
    both the LP and the integer finalization infeasible once jobs outnumber
    machines. The greedy assignment of jobs in id order supplies m columns
    that jointly cover everything.
    """
    _, machine_jobs = _greedy_assign(instance, np.arange(instance.num_jobs))
    for k, ids in enumerate(machine_jobs):
        if ids:
            pool.add(make_column(k, ids, instance))


def write_log_csv(result: CgResult, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_HEADER)
        for r in result.iterations:
            writer.writerow(
                [
                    r.iteration,
                    f"{r.elapsed_ms:.3f}",
                    f"{r.rmp_objective:.9g}",
                    r.pool_size,
                    r.nn_count,
                    r.dp_count,
                    "" if not np.isfinite(r.min_reduced_cost) else f"{r.min_reduced_cost:.9g}",
                    r.pricing_mode,
                ]
            )


def emit_dataset(result: CgResult, sink) -> int:
    """Write the run's pricing records as JSON lines; returns the record count.

    `sink` may be a path or an open text file. Records exist only for runs
    executed in greedy-dp mode with dataset collection enabled.
    """
    if isinstance(sink, (str, Path)):
        with open(sink, "a", encoding="utf-8") as fh:
            return emit_dataset(result, fh)
    count = 0
    for record in result.dataset_records:
        sink.write(json.dumps(record) + "\n")
        count += 1
    return count


def normalize_curve(records: list[IterationRecord]) -> list[float]:
    """Min-max normalization of the per-iteration objectives to [0, 1]."""
    values = [r.rmp_objective for r in records]
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi - lo <= 0.0:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]
