"""Shared builders and independent reference oracles for the test suite.

The oracles here deliberately avoid the library's own decomposition logic:
batch-level timing walks batches in slot order paying a reconfiguration
whenever the configuration changes, and the subproblem reference enumerates
every batching and every batch-level ordering (including interleavings).
"""

from __future__ import annotations

import itertools
import random

from rebatch import (
    Instance,
    Machine,
    MachineConfig,
    Order,
    OrderKind,
    Schedule,
)
from rebatch.model import INITIAL_CONFIG
from rebatch.subproblem import SpInput


def make_machine(
    mid: int = 1,
    area: int = 100,
    height: int = 300,
    configs: dict[int, dict] | None = None,
    reconfig: dict[tuple[int, int], int] | None = None,
) -> Machine:
    """Build a machine from terse per-config dicts:
    {config_id: {"setup": s, "limit": bool, "eligible": {order: opt}}}."""
    configs = configs or {1: {"setup": 5, "limit": False, "eligible": {}}}
    built = tuple(
        MachineConfig(
            id=cid,
            setup_time=spec.get("setup", 5),
            batch_limit=spec.get("limit", False),
            eligible=dict(spec.get("eligible", {})),
        )
        for cid, spec in sorted(configs.items())
    )
    if reconfig is None:
        reconfig = {}
        ids = [c.id for c in built]
        for a in [INITIAL_CONFIG] + ids:
            for b in ids:
                if a != b:
                    reconfig[(a, b)] = 10
    return Machine(
        id=mid,
        processing_area=area,
        processing_height=height,
        configs=built,
        reconfig=dict(reconfig),
    )


def make_instance(
    orders: list[tuple[int, int, int]],
    machines: list[Machine],
    batch_slots: int | None = None,
) -> Instance:
    """Orders given as (id, area, height) triples; all manufacturing kind."""
    built = tuple(
        Order(id=oid, kind=OrderKind.MANUFACTURING, area=area, height=height)
        for (oid, area, height) in orders
    )
    return Instance(
        orders=built,
        machines=tuple(machines),
        batch_slots=batch_slots if batch_slots is not None else max(len(built), 1),
    )


def batch_level_makespan(instance: Instance, schedule: Schedule) -> int:
    """Reference timing that interprets batch slots literally: batches run in
    slot order and every configuration change costs a reconfiguration."""
    worst = 0
    machines = {m for (m, _, _) in schedule.assignment.values()}
    for mid in machines:
        machine = instance.machine(mid)
        batches: dict[int, tuple[int, list[int]]] = {}
        for oid, (m, cid, b) in schedule.assignment.items():
            if m != mid:
                continue
            slot = batches.setdefault(b, (cid, []))
            assert slot[0] == cid, "mixed configurations in one batch"
            slot[1].append(oid)
        clock = 0
        prev = INITIAL_CONFIG
        for b in sorted(batches):
            cid, members = batches[b]
            cfg = machine.config(cid)
            if cid != prev:
                clock += machine.reconfig[(prev, cid)]
                prev = cid
            clock += cfg.setup_time + sum(cfg.eligible[o] for o in members)
        worst = max(worst, clock)
    return worst


def random_valid_schedule(instance: Instance, rng: random.Random) -> Schedule:
    """A feasible schedule with randomized assignment, batching, interleaved
    batch order, and a random configuration sequence."""
    assignment: dict[int, tuple[int, int, int]] = {}
    slot_counter: dict[int, int] = {m.id: 0 for m in instance.machines}
    open_batches: dict[tuple[int, int], list[tuple[int, int]]] = {}  # (m,c) -> [(slot, free)]
    order_ids = [o.id for o in instance.orders]
    rng.shuffle(order_ids)
    for oid in order_ids:
        order = instance.order(oid)
        mid, cid = rng.choice(instance.feasible_pairs(oid))
        machine = instance.machine(mid)
        cfg = machine.config(cid)
        placed = False
        if not cfg.batch_limit and rng.random() < 0.6:
            for i, (slot, free) in enumerate(open_batches.get((mid, cid), [])):
                if order.area <= free:
                    assignment[oid] = (mid, cid, slot)
                    open_batches[(mid, cid)][i] = (slot, free - order.area)
                    placed = True
                    break
        if not placed:
            slot = slot_counter[mid]
            slot_counter[mid] += 1
            assignment[oid] = (mid, cid, slot)
            open_batches.setdefault((mid, cid), []).append(
                (slot, machine.processing_area - order.area)
            )
    used: dict[int, list[int]] = {}
    for oid, (mid, cid, _b) in assignment.items():
        if cid not in used.setdefault(mid, []):
            used[mid].append(cid)
    config_sequence = {}
    for mid, configs in used.items():
        rng.shuffle(configs)
        config_sequence[mid] = tuple(configs)
    return Schedule(assignment=assignment, config_sequence=config_sequence)


def enumerate_sp_optimum(sp: SpInput) -> int:
    """Exhaustive batch-level subproblem reference: every feasible batching of
    every configuration crossed with every ordering of the resulting batches,
    interleavings included."""
    machine = sp.machine
    configs = sorted(c for c, entries in sp.orders_by_config.items() if entries)
    if not configs:
        return 0

    def partitions(items):
        if not items:
            yield []
            return
        groups: list[list] = []

        def rec(i):
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

    per_config_options = []
    for cid in configs:
        cfg = machine.config(cid)
        entries = sorted(sp.orders_by_config[cid])
        options = []
        for partition in partitions(entries):
            ok = True
            for batch in partition:
                if cfg.batch_limit and len(batch) > 1:
                    ok = False
                    break
                if sum(e[1] for e in batch) > machine.processing_area:
                    ok = False
                    break
            if ok:
                durations = [
                    cfg.setup_time + sum(e[2] for e in batch) for batch in partition
                ]
                options.append(durations)
        per_config_options.append(options)

    best = None
    for combo in itertools.product(*per_config_options):
        batches = [
            (cid, d) for cid, durations in zip(configs, combo) for d in durations
        ]
        for ordering in itertools.permutations(range(len(batches))):
            clock = 0
            prev = INITIAL_CONFIG
            for idx in ordering:
                cid, duration = batches[idx]
                if cid != prev:
                    clock += machine.reconfig[(prev, cid)]
                    prev = cid
                clock += duration
            if best is None or clock < best:
                best = clock
    return best
