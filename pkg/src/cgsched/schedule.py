"""Shortest-weighted-processing-time ordering, schedule columns, reduced costs.

A column is one machine's schedule: a job subset in SWPT order together with
its completion times and total weighted completion time. Every other module
builds on these three operations.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .instance import Instance, Job


@dataclass(frozen=True)
class Column:
    machine: int
    jobs: tuple[int, ...]
    completion_times: tuple[int, ...]
    cost: int

    @property
    def job_set(self) -> frozenset[int]:
        return frozenset(self.jobs)

    def key(self) -> tuple[int, frozenset[int]]:
        """Pool identity: the machine plus the unordered job set."""
        return (self.machine, self.job_set)


@dataclass
class DualSolution:
    pi: np.ndarray
    sigma: np.ndarray

    def validate(self, instance: Instance) -> None:
        if len(self.pi) != instance.num_jobs or len(self.sigma) != instance.num_machines:
            raise ValueError("dual vectors do not match instance dimensions")
        if np.any(self.sigma > 1e-9):
            raise ValueError("machine duals must satisfy sigma <= 0")


def swpt_compare(a: Job, b: Job, machine: int) -> int:
    """-1 if a precedes b on the machine, +1 if b precedes a, 0 if identical.

    Exact integer cross-multiplication of p/w ratios; ties go to the lower id.
    """
    lhs = a.proc_times[machine] * b.weight
    rhs = b.proc_times[machine] * a.weight
    if lhs != rhs:
        return -1 if lhs < rhs else 1
    if a.id != b.id:
        return -1 if a.id < b.id else 1
    return 0


def swpt_sort(jobs: Iterable[Job], machine: int) -> list[Job]:
    return sorted(jobs, key=functools.cmp_to_key(lambda a, b: swpt_compare(a, b, machine)))


def make_column(machine: int, job_ids: Iterable[int], instance: Instance) -> Column:
    """Build the SWPT schedule column for a job subset on one machine."""
    ids = list(job_ids)
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate job ids in column: {sorted(ids)}")
    for jid in ids:
        if not 1 <= jid <= instance.num_jobs:
            raise ValueError(f"unknown job id {jid}")
    ordered = swpt_sort((instance.job(jid) for jid in ids), machine)
    completions: list[int] = []
    t = 0
    cost = 0
    for job in ordered:
        t += job.proc_times[machine]
        completions.append(t)
        cost += job.weight * t
    return Column(
        machine=machine,
        jobs=tuple(job.id for job in ordered),
        completion_times=tuple(completions),
        cost=cost,
    )


def reduced_cost(col: Column, duals: DualSolution) -> float:
    """f_s - sum of job duals in the column - the machine dual."""
    pi_sum = float(np.sum(duals.pi[[j - 1 for j in col.jobs]])) if col.jobs else 0.0
    return float(col.cost) - pi_sum - float(duals.sigma[col.machine])
