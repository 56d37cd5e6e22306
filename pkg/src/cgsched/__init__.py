"""Column generation for unrelated parallel machine scheduling.

Minimizes total weighted completion time via a set-partitioning master LP
whose pricing subproblems are solved exactly by dynamic programming or
approximated by a transformer-pointer network, with a DP certificate at
termination either way.
"""

from .driver import CgConfig, CgResult, IterationRecord, normalize_curve, run_cg
from .instance import (
    Instance,
    Job,
    generate_uniform,
    generate_weibull,
    parse_instance_name,
    read_instance,
    write_instance,
)
from .pricing import PricingResult, brute_force_pricing, k_best_columns, solve_pricing_dp
from .rmp import (
    ColumnPool,
    IntegerSolution,
    RmpSolution,
    ensure_feasible,
    finalize_integer,
    solve_lp,
)
from .schedule import Column, DualSolution, make_column, reduced_cost, swpt_compare

__all__ = [
    "CgConfig",
    "CgResult",
    "Column",
    "ColumnPool",
    "DualSolution",
    "Instance",
    "IntegerSolution",
    "IterationRecord",
    "Job",
    "PricingResult",
    "RmpSolution",
    "brute_force_pricing",
    "ensure_feasible",
    "finalize_integer",
    "generate_uniform",
    "generate_weibull",
    "k_best_columns",
    "make_column",
    "normalize_curve",
    "parse_instance_name",
    "read_instance",
    "reduced_cost",
    "run_cg",
    "solve_lp",
    "solve_pricing_dp",
    "swpt_compare",
    "write_instance",
]
