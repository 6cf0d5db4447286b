"""Batch scheduling on parallel non-identical reconfigurable machines.

Exact Benders-style decomposition solver, two-step warm-start constructor,
brute-force oracle, random instance generator, MILP export, and benchmark
tooling, all minimizing makespan.
"""

from .generator import GenConfig, enforce_triangle, generate
from .lbbd import (
    IterationRecord,
    LbbdParams,
    SolveResult,
    make_cut,
    solve_lbbd,
    warmstart_construct,
)
from .lp_export import emit_milp
from .master import (
    Cut,
    MasterSolution,
    evaluate_cut,
    machine_lb,
    solve_master,
    static_mrt,
    tight_mrt,
)
from .model import (
    Instance,
    Machine,
    MachineConfig,
    Metrics,
    Order,
    OrderKind,
    Schedule,
    TimedSchedule,
    canonicalize,
    compute_timing,
    gap,
    rpd,
    validate_instance,
    validate_schedule,
)
from .oracle import OracleLimitError, OracleLimits, brute_force
from .subproblem import SpInput, SpResult, min_batches, sequence_configs, solve_subproblem

__all__ = [
    "Cut",
    "GenConfig",
    "Instance",
    "IterationRecord",
    "LbbdParams",
    "Machine",
    "MachineConfig",
    "MasterSolution",
    "Metrics",
    "OracleLimitError",
    "OracleLimits",
    "Order",
    "OrderKind",
    "Schedule",
    "SolveResult",
    "SpInput",
    "SpResult",
    "TimedSchedule",
    "brute_force",
    "canonicalize",
    "compute_timing",
    "emit_milp",
    "enforce_triangle",
    "evaluate_cut",
    "gap",
    "generate",
    "machine_lb",
    "make_cut",
    "min_batches",
    "rpd",
    "sequence_configs",
    "solve_lbbd",
    "solve_master",
    "solve_subproblem",
    "static_mrt",
    "tight_mrt",
    "validate_instance",
    "validate_schedule",
    "warmstart_construct",
]
