"""Exact per-machine subproblem: batch the orders assigned to each utilized
configuration and sequence the configurations to minimize machine makespan.

The configuration duration depends on the assignment only through the number
of batches, and inter-batch timing only on the configuration order, so the
subproblem decomposes exactly into minimum-cardinality bin packing per
configuration plus a minimum-cost Hamiltonian path over the utilized
configurations starting at the initial state.  The equivalence with
batch-level enumeration is covered by tests, not assumed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .model import INITIAL_CONFIG, Machine


@dataclass(frozen=True)
class SpInput:
    """Orders assigned to one machine, grouped by utilized configuration.

    ``orders_by_config`` maps config id -> tuples of (order id, area,
    processing time).  ``time_limit`` bounds only the bin-packing search.
    """

    machine: Machine
    orders_by_config: dict[int, tuple[tuple[int, int, int], ...]]
    time_limit: float | None = None


@dataclass(frozen=True)
class SpResult:
    batches: dict[int, tuple[tuple[int, ...], ...]]
    sequence: tuple[int, ...]
    makespan: int
    proven_optimal: bool


class PackResult(NamedTuple):
    batches: list[list[int]]
    proven_optimal: bool


def pack_batches(
    items: Sequence[tuple[int, int]],
    capacity: int,
    batch_limit: bool = False,
    deadline: float | None = None,
) -> PackResult:
    """Partition (id, area) items into the fewest batches of total area
    <= capacity.

    First-fit-decreasing provides the incumbent; when it does not meet the
    ceiling lower bound, a branch-and-bound over item placements closes the
    gap.  Items are handled in descending area, ascending id order, so the
    result is deterministic.  If ``deadline`` cuts the search short the FFD
    (or best-so-far) packing is returned with proven_optimal False.
    """
    for oid, area in items:
        if area > capacity:
            raise ValueError(f"item {oid} area {area} exceeds capacity {capacity}")
    if not items:
        return PackResult([], True)
    ordered = sorted(items, key=lambda t: (-t[1], t[0]))
    if batch_limit:
        return PackResult([[oid] for oid, _ in ordered], True)

    ffd: list[list[int]] = []
    residual: list[int] = []
    for oid, area in ordered:
        for i, r in enumerate(residual):
            if area <= r:
                ffd[i].append(oid)
                residual[i] -= area
                break
        else:
            ffd.append([oid])
            residual.append(capacity - area)

    total = sum(a for _, a in ordered)
    lower = math.ceil(total / capacity)
    if len(ffd) == lower:
        return PackResult(ffd, True)

    best = [list(b) for b in ffd]
    best_count = len(ffd)
    truncated = False
    areas = [a for _, a in ordered]
    suffix_total = [0] * (len(ordered) + 1)
    for i in range(len(ordered) - 1, -1, -1):
        suffix_total[i] = suffix_total[i + 1] + areas[i]

    bins: list[list[int]] = []
    free: list[int] = []
    ticks = 0

    def place(i: int) -> None:
        nonlocal best, best_count, truncated, ticks
        if truncated or best_count == lower:
            return
        ticks += 1
        if deadline is not None and ticks % 256 == 0 and time.monotonic() > deadline:
            truncated = True
            return
        if i == len(ordered):
            if len(bins) < best_count:
                best = [list(b) for b in bins]
                best_count = len(bins)
            return
        # remaining area needs at least this many bins beyond the open ones
        spare = sum(free)
        extra = math.ceil(max(0, suffix_total[i] - spare) / capacity)
        if len(bins) + extra >= best_count:
            return
        oid, area = ordered[i]
        # a bin the item fills exactly dominates all other placements
        for j, r in enumerate(free):
            if r == area:
                bins[j].append(oid)
                free[j] = 0
                place(i + 1)
                bins[j].pop()
                free[j] = area
                return
        tried: set[int] = set()
        for j, r in enumerate(free):
            if area <= r and r not in tried:  # equal residuals are interchangeable
                tried.add(r)
                bins[j].append(oid)
                free[j] -= area
                place(i + 1)
                bins[j].pop()
                free[j] += area
        if len(bins) + 1 < best_count:
            bins.append([oid])
            free.append(capacity - area)
            place(i + 1)
            bins.pop()
            free.pop()

    place(0)
    return PackResult(best, not truncated)


def min_batches(
    items: Sequence[tuple[int, int]],
    capacity: int,
    batch_limit: bool = False,
) -> list[list[int]]:
    """Minimum-cardinality batching of (id, area) items; see pack_batches."""
    return pack_batches(items, capacity, batch_limit).batches


def sequence_configs(
    utilized: Sequence[int] | set[int],
    reconfig: dict[tuple[int, int], int],
) -> tuple[tuple[int, ...], int]:
    """Cheapest order in which to visit every utilized configuration once,
    starting from the initial state.

    Held-Karp dynamic program over configuration subsets; ties resolve to the
    lexicographically smallest sequence.  Returns (sequence, total
    reconfiguration time including the move out of the initial state).
    """
    configs = sorted(utilized)
    n = len(configs)
    if n == 0:
        return (), 0

    # dp[(mask, last)] = (cost, sequence); sequence kept for tie-breaking
    dp: dict[tuple[int, int], tuple[int, tuple[int, ...]]] = {}
    for i, c in enumerate(configs):
        dp[(1 << i, i)] = (reconfig[(INITIAL_CONFIG, c)], (c,))
    for mask in range(1, 1 << n):
        for last in range(n):
            if not mask & (1 << last):
                continue
            state = dp.get((mask, last))
            if state is None:
                continue
            cost, seq = state
            for nxt in range(n):
                if mask & (1 << nxt):
                    continue
                cand = (
                    cost + reconfig[(configs[last], configs[nxt])],
                    seq + (configs[nxt],),
                )
                key = (mask | (1 << nxt), nxt)
                if key not in dp or cand < dp[key]:
                    dp[key] = cand
    full = (1 << n) - 1
    best = min(dp[(full, last)] for last in range(n) if (full, last) in dp)
    return best[1], best[0]


def solve_subproblem(sp: SpInput) -> SpResult:
    """Optimal batching and configuration sequencing for one machine.

    makespan = sum over utilized configurations of (processing + setups)
    plus the minimum reconfiguration path cost.  proven_optimal is False only
    when the time limit truncated a bin-packing search; the makespan is then
    still a valid upper bound.
    """
    machine = sp.machine
    for cid, entries in sp.orders_by_config.items():
        cfg = machine.config(cid)
        for oid, area, opt in entries:
            if oid not in cfg.eligible:
                raise ValueError(
                    f"order {oid} not eligible on machine {machine.id} config {cid}"
                )
            if cfg.eligible[oid] != opt:
                raise ValueError(
                    f"order {oid} processing time mismatch on machine {machine.id}"
                    f" config {cid}"
                )
            if area > machine.processing_area:
                raise ValueError(
                    f"order {oid} area {area} exceeds machine {machine.id}"
                    f" processing area"
                )

    deadline = None
    if sp.time_limit is not None:
        deadline = time.monotonic() + sp.time_limit

    batches: dict[int, tuple[tuple[int, ...], ...]] = {}
    total_duration = 0
    proven = True
    used: list[int] = []
    for cid in sorted(sp.orders_by_config):
        entries = sp.orders_by_config[cid]
        if not entries:
            continue
        used.append(cid)
        cfg = machine.config(cid)
        packed = pack_batches(
            [(oid, area) for oid, area, _ in entries],
            machine.processing_area,
            cfg.batch_limit,
            deadline,
        )
        proven = proven and packed.proven_optimal
        batches[cid] = tuple(tuple(b) for b in packed.batches)
        total_duration += sum(opt for _, _, opt in entries)
        total_duration += cfg.setup_time * len(packed.batches)

    sequence, reconfig_cost = sequence_configs(used, machine.reconfig)
    return SpResult(
        batches=batches,
        sequence=sequence,
        makespan=total_duration + reconfig_cost,
        proven_optimal=proven,
    )
