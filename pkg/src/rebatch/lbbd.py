"""Benders-style decomposition loop and the two-step warm-start constructor.

Each iteration solves the assignment master problem (seeded with the previous
iteration's solution), then every machine's batching-and-sequencing
subproblem.  Subproblem makespans update the incumbent schedule; machines
attaining the iteration's worst makespan contribute optimality cuts.  The
loop stops when the worst subproblem makespan is within the master gap
tolerance of the master objective, or when time or iteration budgets run
out, returning the incumbent with the best proven lower bound.  Subproblems
are always feasible, so no feasibility cuts exist.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .master import Cut, MasterSolution, solve_master
from .model import (
    Instance,
    Schedule,
    TimedSchedule,
    compute_timing,
    gap,
    validate_instance,
)
from .subproblem import SpInput, SpResult, solve_subproblem


@dataclass(frozen=True)
class LbbdParams:
    total_time_limit: float = 600.0
    mp_gap_limit: float = 1.0  # percent
    sp_time_limit: float | None = 60.0
    max_iterations: int | None = None
    mrt_mode: str = "static"
    use_warm_start: bool = True

    def validate(self) -> None:
        if self.total_time_limit <= 0:
            raise ValueError("total_time_limit must be positive")
        if self.mp_gap_limit < 0:
            raise ValueError("mp_gap_limit must be nonnegative")
        if self.sp_time_limit is not None and self.sp_time_limit <= 0:
            raise ValueError("sp_time_limit must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mp_objective: int
    max_sp_makespan: int
    upper_bound: int
    lower_bound: int
    wall_ms: int


@dataclass(frozen=True)
class SolveResult:
    best_schedule: TimedSchedule
    upper_bound: int
    lower_bound: int
    gap_percent: float
    rpd_percent: float | None
    iterations: int
    proven_optimal: bool
    per_iteration_log: tuple[IterationRecord, ...]


def make_cut(
    machine_id: int,
    assignment_h: set[tuple[int, int]] | frozenset[tuple[int, int]],
    sp_makespan: int,
) -> Cut:
    """Optimality cut binding the master objective to the machine's proven
    subproblem makespan whenever the same (order, config) set recurs."""
    return Cut(
        machine_id=machine_id,
        assignment_set=frozenset(assignment_h),
        bound=sp_makespan,
    )


def _sp_inputs(
    instance: Instance,
    assignment: dict[int, tuple[int, int]],
    sp_time_limit: float | None,
) -> dict[int, SpInput]:
    grouped: dict[int, dict[int, list[tuple[int, int, int]]]] = {}
    for oid in sorted(assignment):
        mid, cid = assignment[oid]
        order = instance.order(oid)
        opt = instance.machine(mid).config(cid).eligible[oid]
        grouped.setdefault(mid, {}).setdefault(cid, []).append(
            (oid, order.area, opt)
        )
    return {
        mid: SpInput(
            machine=instance.machine(mid),
            orders_by_config={c: tuple(v) for c, v in by_config.items()},
            time_limit=sp_time_limit,
        )
        for mid, by_config in grouped.items()
    }


def _assemble(sp_results: dict[int, SpResult]) -> Schedule:
    assignment: dict[int, tuple[int, int, int]] = {}
    config_sequence: dict[int, tuple[int, ...]] = {}
    for mid in sorted(sp_results):
        res = sp_results[mid]
        if not res.sequence:
            continue
        slot = 0
        for cid in res.sequence:
            for batch in res.batches[cid]:
                for oid in batch:
                    assignment[oid] = (mid, cid, slot)
                slot += 1
        config_sequence[mid] = res.sequence
    return Schedule(assignment=assignment, config_sequence=config_sequence)


def _construct(
    instance: Instance,
    assignment: dict[int, tuple[int, int]],
    sp_time_limit: float | None,
) -> tuple[TimedSchedule, dict[int, SpResult], bool]:
    """Solve every machine's subproblem for a master assignment and stitch
    the results into a full timed schedule."""
    sp_results = {
        mid: solve_subproblem(sp)
        for mid, sp in sorted(_sp_inputs(instance, assignment, sp_time_limit).items())
    }
    schedule = _assemble(sp_results)
    timed = compute_timing(instance, schedule)
    truncated = any(not r.proven_optimal for r in sp_results.values())
    return timed, sp_results, truncated


def _polish(
    instance: Instance,
    assignment: dict[int, tuple[int, int]],
    deadline: float,
    cache: dict[tuple[int, frozenset[tuple[int, int]]], int],
) -> dict[int, tuple[int, int]]:
    """Local search on a full assignment scored by true per-machine
    subproblem makespans (two machines change per move).  Deterministic;
    stops at a fixpoint or the deadline."""
    assignment = dict(assignment)
    orders = {o.id: o for o in instance.orders}
    machines = sorted(m.id for m in instance.machines)
    content: dict[int, set[tuple[int, int]]] = {m: set() for m in machines}
    for oid, (mid, cid) in assignment.items():
        content[mid].add((oid, cid))

    def sp_makespan(mid: int, items: frozenset[tuple[int, int]]) -> int:
        key = (mid, items)
        if key not in cache:
            machine = instance.machine(mid)
            by_config: dict[int, list[tuple[int, int, int]]] = {}
            for oid, cid in sorted(items):
                by_config.setdefault(cid, []).append(
                    (oid, orders[oid].area, machine.config(cid).eligible[oid])
                )
            cache[key] = solve_subproblem(
                SpInput(machine, {c: tuple(v) for c, v in by_config.items()}, None)
            ).makespan
        return cache[key]

    spans = {m: sp_makespan(m, frozenset(content[m])) for m in machines}

    def score() -> tuple[int, ...]:
        return tuple(sorted(spans.values(), reverse=True))

    choices = {oid: instance.feasible_pairs(oid) for oid in sorted(assignment)}
    for _ in range(30):
        improved = False
        if time.monotonic() > deadline:
            break
        for oid in sorted(assignment):
            cur_mid, cur_cid = assignment[oid]
            best = None
            cur_score = score()
            for (mid, cid) in choices[oid]:
                if (mid, cid) == (cur_mid, cur_cid):
                    continue
                src = frozenset(content[cur_mid] - {(oid, cur_cid)})
                dst = frozenset(content[mid] | {(oid, cid)}) if mid != cur_mid else src | {(oid, cid)}
                trial = dict(spans)
                trial[cur_mid] = sp_makespan(cur_mid, src)
                trial[mid] = sp_makespan(mid, frozenset(dst))
                val = tuple(sorted(trial.values(), reverse=True))
                if val < cur_score and (best is None or val < best[0]):
                    best = (val, mid, cid)
            if best is not None:
                _, mid, cid = best
                content[cur_mid].discard((oid, cur_cid))
                content[mid].add((oid, cid))
                assignment[oid] = (mid, cid)
                spans[cur_mid] = sp_makespan(cur_mid, frozenset(content[cur_mid]))
                spans[mid] = sp_makespan(mid, frozenset(content[mid]))
                improved = True
            if time.monotonic() > deadline:
                break
        if not improved:
            break
    return assignment


def _warmstart(
    instance: Instance,
    time_limit: float,
    mp_gap_limit: float = 0.0,
) -> tuple[TimedSchedule, MasterSolution, bool]:
    """Two-step construction: assignment by the master problem with the
    utilized-set-restricted reconfiguration bound, then per-machine
    batch-count minimization, completed with exact sequencing."""
    start = time.monotonic()
    mp = solve_master(
        instance,
        cuts=(),
        gap_limit=mp_gap_limit,
        time_limit=time_limit,
        mrt_mode="dynamic",
    )
    remaining = max(time_limit - (time.monotonic() - start), 1.0)
    timed, _, truncated = _construct(instance, mp.assignment, remaining)
    return timed, mp, truncated


def warmstart_construct(
    instance: Instance,
    time_limit: float = 60.0,
    mp_gap_limit: float = 0.0,
) -> TimedSchedule:
    """Standalone constructive heuristic; also serves as the decomposition
    loop's initial incumbent."""
    violations = validate_instance(instance)
    if violations:
        raise ValueError(f"invalid instance: {violations[0]}")
    timed, _, _ = _warmstart(instance, time_limit, mp_gap_limit)
    return timed


def solve_lbbd(instance: Instance, params: LbbdParams | None = None) -> SolveResult:
    """Run the full decomposition loop; see the module docstring."""
    params = params or LbbdParams()
    params.validate()
    violations = validate_instance(instance)
    if violations:
        raise ValueError(f"invalid instance: {violations[0]}")

    start = time.monotonic()
    limit = params.total_time_limit
    log: list[IterationRecord] = []
    cuts: list[Cut] = []
    lower = 0
    incumbent: TimedSchedule | None = None
    seed: MasterSolution | None = None
    truncation_seen = False
    proven = False
    sp_cache: dict[tuple[int, frozenset[tuple[int, int]]], int] = {}

    def try_improve(assignment: dict[int, tuple[int, int]]) -> None:
        nonlocal incumbent, truncation_seen
        remaining = limit - (time.monotonic() - start)
        deadline = time.monotonic() + max(min(remaining * 0.25, 15.0), 0.5)
        polished = _polish(instance, assignment, deadline, sp_cache)
        timed, _, truncated = _construct(instance, polished, params.sp_time_limit)
        truncation_seen |= truncated
        if incumbent is None or timed.makespan < incumbent.makespan:
            incumbent = timed

    if params.use_warm_start:
        ws_budget = max(min(limit * 0.25, limit - (time.monotonic() - start)), 1.0)
        incumbent, seed, ws_trunc = _warmstart(
            instance, ws_budget, params.mp_gap_limit
        )
        truncation_seen |= ws_trunc
        lower = max(lower, seed.lower_bound)
        try_improve(seed.assignment)

    iteration = 0
    while True:
        remaining = limit - (time.monotonic() - start)
        if remaining <= 0 and iteration > 0:
            break
        iteration += 1
        mp = solve_master(
            instance,
            cuts=cuts,
            gap_limit=params.mp_gap_limit,
            time_limit=max(remaining, 1.0),
            incumbent=seed,
            mrt_mode=params.mrt_mode,
        )
        seed = mp
        lower = max(lower, mp.lower_bound)

        timed, sp_results, truncated = _construct(
            instance, mp.assignment, params.sp_time_limit
        )
        truncation_seen |= truncated
        max_sp = max((r.makespan for r in sp_results.values()), default=0)
        if incumbent is None or timed.makespan < incumbent.makespan:
            incumbent = timed
        try_improve(mp.assignment)

        log.append(
            IterationRecord(
                iteration=iteration,
                mp_objective=mp.objective,
                max_sp_makespan=max_sp,
                upper_bound=incumbent.makespan,
                lower_bound=lower,
                wall_ms=int((time.monotonic() - start) * 1000),
            )
        )

        if max_sp <= mp.objective * (1.0 + params.mp_gap_limit / 100.0):
            proven = (
                mp.proven_gap <= params.mp_gap_limit + 1e-9 and not truncation_seen
            )
            break
        if params.max_iterations is not None and iteration >= params.max_iterations:
            break
        for mid in sorted(sp_results):
            res = sp_results[mid]
            if res.makespan == max_sp:
                pairs = {
                    (oid, cid)
                    for oid, (m, cid) in mp.assignment.items()
                    if m == mid
                }
                cuts.append(make_cut(mid, pairs, res.makespan))

    assert incumbent is not None
    upper = incumbent.makespan
    lower = min(lower, upper)
    gap_percent = gap(upper, lower) if upper > 0 else 0.0
    return SolveResult(
        best_schedule=incumbent,
        upper_bound=upper,
        lower_bound=lower,
        gap_percent=gap_percent,
        rpd_percent=None,
        iterations=iteration,
        proven_optimal=proven,
        per_iteration_log=tuple(log),
    )
