"""Exhaustive optimal solver for tiny instances.

Ground truth for the solver equivalence tests: enumerates every eligible
order-to-(machine, configuration) assignment, and per machine every set
partition of each configuration's orders into area-feasible batches crossed
with every permutation of the utilized configurations.  No shortcut prunes
the search; repeated per-machine assignments are only memoized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import (
    INITIAL_CONFIG,
    Instance,
    Machine,
    Schedule,
    TimedSchedule,
    compute_timing,
    validate_instance,
)


@dataclass(frozen=True)
class OracleLimits:
    max_orders: int = 7
    max_machines: int = 2
    max_configs_per_machine: int = 3
    node_budget: int = 2_000_000


class OracleLimitError(Exception):
    """Instance too large for exhaustive search; the oracle never approximates."""


def _partitions(items: tuple[int, ...]):
    """All set partitions of items, in restricted-growth order."""
    if not items:
        yield []
        return
    groups: list[list[int]] = []

    def rec(i: int):
        if i == len(items):
            yield [tuple(g) for g in groups]
            return
        for g in groups:
            g.append(items[i])
            yield from rec(i + 1)
            g.pop()
        groups.append([items[i]])
        yield from rec(i + 1)
        groups.pop()

    yield from rec(0)


def _machine_best(
    instance: Instance,
    machine: Machine,
    content: tuple[tuple[int, int], ...],
) -> tuple[int, dict[int, tuple[tuple[int, ...], ...]], tuple[int, ...]]:
    """Optimal makespan of one machine given its (order, config) content,
    by full enumeration of batchings and configuration permutations."""
    by_config: dict[int, list[int]] = {}
    for oid, cid in content:
        by_config.setdefault(cid, []).append(oid)
    configs = sorted(by_config)
    if not configs:
        return 0, {}, ()

    feasible_partitions: list[list[list[tuple[int, ...]]]] = []
    for cid in configs:
        cfg = machine.config(cid)
        options = []
        for partition in _partitions(tuple(sorted(by_config[cid]))):
            ok = True
            for batch in partition:
                if cfg.batch_limit and len(batch) > 1:
                    ok = False
                    break
                area = sum(instance.order(o).area for o in batch)
                if area > machine.processing_area:
                    ok = False
                    break
            if ok:
                options.append(partition)
        feasible_partitions.append(options)

    best: tuple[int, dict[int, tuple[tuple[int, ...], ...]], tuple[int, ...]] | None = None
    for combo in itertools.product(*feasible_partitions):
        durations = {}
        for cid, partition in zip(configs, combo):
            cfg = machine.config(cid)
            durations[cid] = (
                sum(cfg.eligible[o] for batch in partition for o in batch)
                + cfg.setup_time * len(partition)
            )
        for perm in itertools.permutations(configs):
            clock = 0
            prev = INITIAL_CONFIG
            for cid in perm:
                clock += machine.reconfig[(prev, cid)] + durations[cid]
                prev = cid
            if best is None or clock < best[0]:
                best = (
                    clock,
                    {cid: tuple(p) for cid, p in zip(configs, combo)},
                    perm,
                )
    assert best is not None
    return best


def brute_force(
    instance: Instance, limits: OracleLimits | None = None
) -> tuple[TimedSchedule, int]:
    """Globally optimal schedule and makespan by exhaustive enumeration.

    Raises OracleLimitError when the instance exceeds the size limits or the
    assignment space exceeds the node budget.
    """
    limits = limits or OracleLimits()
    violations = validate_instance(instance)
    if violations:
        raise ValueError(f"invalid instance: {violations[0]}")
    if len(instance.orders) > limits.max_orders:
        raise OracleLimitError(
            f"{len(instance.orders)} orders exceed the oracle limit of"
            f" {limits.max_orders}"
        )
    if len(instance.machines) > limits.max_machines:
        raise OracleLimitError(
            f"{len(instance.machines)} machines exceed the oracle limit of"
            f" {limits.max_machines}"
        )
    for m in instance.machines:
        if len(m.configs) > limits.max_configs_per_machine:
            raise OracleLimitError(
                f"machine {m.id} has {len(m.configs)} configurations, above the"
                f" oracle limit of {limits.max_configs_per_machine}"
            )

    order_ids = sorted(o.id for o in instance.orders)
    choices = [sorted(instance.feasible_pairs(oid)) for oid in order_ids]
    space = 1
    for pairs in choices:
        space *= len(pairs)
    if space > limits.node_budget:
        raise OracleLimitError(
            f"{space} candidate assignments exceed the node budget of"
            f" {limits.node_budget}"
        )

    memo: dict[
        tuple[int, tuple[tuple[int, int], ...]],
        tuple[int, dict[int, tuple[tuple[int, ...], ...]], tuple[int, ...]],
    ] = {}
    best_makespan: int | None = None
    best_assignment: tuple[tuple[int, int], ...] | None = None

    for combo in itertools.product(*choices):
        content: dict[int, list[tuple[int, int]]] = {}
        for oid, (mid, cid) in zip(order_ids, combo):
            content.setdefault(mid, []).append((oid, cid))
        worst = 0
        for mid, entries in content.items():
            key = (mid, tuple(sorted(entries)))
            if key not in memo:
                memo[key] = _machine_best(instance, instance.machine(mid), key[1])
            worst = max(worst, memo[key][0])
        if best_makespan is None or worst < best_makespan:
            best_makespan = worst
            best_assignment = combo

    assert best_makespan is not None and best_assignment is not None
    assignment: dict[int, tuple[int, int, int]] = {}
    config_sequence: dict[int, tuple[int, ...]] = {}
    content = {}
    for oid, (mid, cid) in zip(order_ids, best_assignment):
        content.setdefault(mid, []).append((oid, cid))
    for mid in sorted(content):
        key = (mid, tuple(sorted(content[mid])))
        _, batches, perm = memo[key]
        slot = 0
        for cid in perm:
            for batch in batches[cid]:
                for oid in batch:
                    assignment[oid] = (mid, cid, slot)
                slot += 1
        config_sequence[mid] = perm
    schedule = Schedule(assignment=assignment, config_sequence=config_sequence)
    timed = compute_timing(instance, schedule)
    return timed, best_makespan
