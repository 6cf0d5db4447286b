"""Benchmark harness and parameter sweeps.

Bench rows mirror the comparison-table layout: best lower bound and best
objective across methods per instance, per-method gap against the best lower
bound and deviation from the best objective.  Percent values are rounded to
two decimals only at CSV serialization.
"""

from __future__ import annotations

import csv
import dataclasses
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .generator import GenConfig, generate
from .lbbd import LbbdParams, _warmstart, solve_lbbd
from .model import Instance, gap, rpd
from .oracle import OracleLimits, brute_force

METHODS = ("lbbd", "warmstart", "oracle")

SWEEP_AXES = {
    "configs": "n_configs_per_machine",
    "machines": "n_machines",
    "eligibility": "eligibility_prob",
    "reconfig": "scale_reconfig",
    "setup": "scale_setup",
    "area": "scale_area",
    "opt-variance": "scale_opt_variance",
}


@dataclass(frozen=True)
class BenchRow:
    label: str
    method: str
    best_lb: int | None
    objective: int | None
    gap_percent: float | None
    rpd_percent: float | None
    wall_ms: int
    proven_optimal: bool
    status: str = "ok"


def _run_method(
    instance: Instance,
    method: str,
    time_limit: float,
    params: LbbdParams,
) -> tuple[int, int, bool]:
    """Returns (objective, lower bound, proven) for one method."""
    if method == "lbbd":
        res = solve_lbbd(
            instance, dataclasses.replace(params, total_time_limit=time_limit)
        )
        return res.upper_bound, res.lower_bound, res.proven_optimal
    if method == "warmstart":
        timed, mp, truncated = _warmstart(instance, time_limit, params.mp_gap_limit)
        return timed.makespan, min(mp.lower_bound, timed.makespan), False
    if method == "oracle":
        timed, makespan = brute_force(instance, OracleLimits())
        return makespan, makespan, True
    raise ValueError(f"unknown method {method!r}")


def run_bench(
    instances: Sequence[tuple[str, Instance]],
    methods: Sequence[str] = METHODS,
    time_limit: float = 600.0,
    params: LbbdParams | None = None,
) -> list[BenchRow]:
    """Run each method on each instance; a method failure becomes a failed
    row, not a harness abort."""
    params = params or LbbdParams()
    rows: list[BenchRow] = []
    for label, instance in instances:
        results: dict[str, tuple[int, int, bool, int, str]] = {}
        for method in methods:
            begin = time.monotonic()
            try:
                objective, lower, proven = _run_method(
                    instance, method, time_limit, params
                )
                status = "ok"
            except Exception as exc:  # noqa: BLE001 - recorded, not raised
                objective, lower, proven = 0, 0, False
                status = f"failed: {exc}"
            wall_ms = int((time.monotonic() - begin) * 1000)
            results[method] = (objective, lower, proven, wall_ms, status)

        ok = [r for r in results.values() if r[4] == "ok"]
        best_lb = max((r[1] for r in ok), default=None)
        best_obj = min((r[0] for r in ok), default=None)
        for method in methods:
            objective, lower, proven, wall_ms, status = results[method]
            failed = status != "ok"
            rows.append(
                BenchRow(
                    label=label,
                    method=method,
                    best_lb=best_lb,
                    objective=None if failed else objective,
                    gap_percent=None if failed or best_lb is None else gap(objective, best_lb),
                    rpd_percent=None if failed or best_obj is None else rpd(objective, best_obj),
                    wall_ms=wall_ms,
                    proven_optimal=proven,
                    status=status,
                )
            )
    return rows


def write_bench_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "label",
                "method",
                "best_lb",
                "objective",
                "gap_percent",
                "rpd_percent",
                "wall_ms",
                "proven_optimal",
                "status",
            ]
        )
        for row in rows:
            writer.writerow(
                [
                    row.label,
                    row.method,
                    "" if row.best_lb is None else row.best_lb,
                    "" if row.objective is None else row.objective,
                    "" if row.gap_percent is None else f"{row.gap_percent:.2f}",
                    "" if row.rpd_percent is None else f"{row.rpd_percent:.2f}",
                    row.wall_ms,
                    int(row.proven_optimal),
                    row.status,
                ]
            )


@dataclass(frozen=True)
class SweepRow:
    level: float
    mean_makespan: float
    mean_gap_percent: float
    failures: int


def run_sweep(
    base: GenConfig,
    axis: str,
    levels: Sequence[float],
    replications: int = 3,
    params: LbbdParams | None = None,
) -> list[SweepRow]:
    """Generate and solve ``replications`` instances per level of one
    generator parameter, averaging makespan and gap.

    Seeds derive as base.seed + level_index * 1000 + replication, so levels
    are comparable without sharing instances.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    params = params or LbbdParams()
    field = SWEEP_AXES[axis]
    rows: list[SweepRow] = []
    for level_index, level in enumerate(levels):
        value = int(level) if field.startswith("n_") else float(level)
        makespans: list[int] = []
        gaps: list[float] = []
        failures = 0
        for replication in range(replications):
            cfg = dataclasses.replace(
                base,
                seed=base.seed + level_index * 1000 + replication,
                **{field: value},
            )
            try:
                result = solve_lbbd(generate(cfg), params)
                makespans.append(result.upper_bound)
                gaps.append(result.gap_percent)
            except Exception:  # noqa: BLE001 - recorded per row
                failures += 1
        rows.append(
            SweepRow(
                level=float(level),
                mean_makespan=statistics.fmean(makespans) if makespans else 0.0,
                mean_gap_percent=statistics.fmean(gaps) if gaps else 0.0,
                failures=failures,
            )
        )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "mean_makespan", "mean_gap_percent", "failures"])
        for row in rows:
            writer.writerow(
                [
                    f"{row.level:g}",
                    f"{row.mean_makespan:.2f}",
                    f"{row.mean_gap_percent:.2f}",
                    row.failures,
                ]
            )
