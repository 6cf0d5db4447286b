"""Problem and solution data types, validation, timing, and metrics.

The scheduling setting: a set of manufacturing/remanufacturing orders must be
assigned to eligible (machine, configuration) pairs, grouped into serial
batches that respect each machine's processing area and height, and the
utilized configurations of every machine must be sequenced, paying a
reconfiguration time between consecutive configurations (and from the
machine's initial state, configuration id 0).  The objective is makespan.

All times and areas are integers, so comparisons in the solvers are exact.
Instances and schedules are treated as immutable after construction; every
function in this module is pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

INITIAL_CONFIG = 0  # reserved id for each machine's initial configuration


class OrderKind(enum.Enum):
    MANUFACTURING = "M"
    REMANUFACTURING = "R"


@dataclass(frozen=True)
class Order:
    """One production order. ``area``/``height`` constrain batch membership."""

    id: int
    kind: OrderKind
    area: int
    height: int


@dataclass(frozen=True)
class MachineConfig:
    """One machine configuration.

    ``eligible`` maps order id -> processing time, so an order is eligible
    exactly when it has an entry (processing times are defined only for
    eligible orders).  ``batch_limit`` restricts batches to a single order.
    """

    id: int
    setup_time: int
    batch_limit: bool
    eligible: dict[int, int]


@dataclass(frozen=True)
class Machine:
    """A reconfigurable machine.

    ``reconfig`` maps (from_config, to_config) -> time, where from_config may
    be 0 (the initial configuration) and to_config never is.
    """

    id: int
    processing_area: int
    processing_height: int
    configs: tuple[MachineConfig, ...]
    reconfig: dict[tuple[int, int], int]

    def config(self, config_id: int) -> MachineConfig:
        for cfg in self.configs:
            if cfg.id == config_id:
                return cfg
        raise KeyError(f"machine {self.id} has no configuration {config_id}")

    def config_ids(self) -> tuple[int, ...]:
        return tuple(cfg.id for cfg in self.configs)


@dataclass(frozen=True)
class Instance:
    orders: tuple[Order, ...]
    machines: tuple[Machine, ...]
    batch_slots: int

    def order(self, order_id: int) -> Order:
        for o in self.orders:
            if o.id == order_id:
                return o
        raise KeyError(f"no order {order_id}")

    def machine(self, machine_id: int) -> Machine:
        for m in self.machines:
            if m.id == machine_id:
                return m
        raise KeyError(f"no machine {machine_id}")

    def is_feasible_pair(self, order: Order, machine: Machine, config: MachineConfig) -> bool:
        """Eligibility plus the height and per-order area screens."""
        return (
            order.id in config.eligible
            and order.height <= machine.processing_height
            and order.area <= machine.processing_area
        )

    def feasible_pairs(self, order_id: int) -> list[tuple[int, int]]:
        """All (machine id, config id) pairs that may process the order."""
        o = self.order(order_id)
        pairs = []
        for m in self.machines:
            for cfg in m.configs:
                if self.is_feasible_pair(o, m, cfg):
                    pairs.append((m.id, cfg.id))
        return pairs


@dataclass(frozen=True)
class Schedule:
    """Full solution: order -> (machine, config, batch slot) plus, per machine,
    the order in which its utilized configurations are visited."""

    assignment: dict[int, tuple[int, int, int]]
    config_sequence: dict[int, tuple[int, ...]]

    def orders_on_machine(self, machine_id: int) -> dict[int, tuple[int, int]]:
        """order id -> (config id, batch index) for one machine."""
        return {
            o: (c, b)
            for o, (m, c, b) in self.assignment.items()
            if m == machine_id
        }


@dataclass(frozen=True)
class TimedSchedule:
    schedule: Schedule
    config_duration: dict[tuple[int, int], int]
    config_completion: dict[tuple[int, int], int]
    makespan: int


@dataclass(frozen=True)
class Metrics:
    gap_percent: float
    rpd_percent: float


# ---------------------------------------------------------------------------
# validation


def validate_instance(instance: Instance) -> list[str]:
    """Check every instance invariant; returns a deterministic list of
    violation messages (empty means valid).  Violations are data, not errors.
    """
    report: list[str] = []

    seen_orders: set[int] = set()
    for o in instance.orders:
        if o.id in seen_orders:
            report.append(f"order {o.id}: duplicate id")
        seen_orders.add(o.id)
        if o.area <= 0:
            report.append(f"order {o.id}: area must be positive (got {o.area})")
        if o.height <= 0:
            report.append(f"order {o.id}: height must be positive (got {o.height})")

    seen_machines: set[int] = set()
    for m in sorted(instance.machines, key=lambda m: m.id):
        if m.id in seen_machines:
            report.append(f"machine {m.id}: duplicate id")
        seen_machines.add(m.id)
        if m.processing_area <= 0:
            report.append(f"machine {m.id}: processing_area must be positive")
        if m.processing_height <= 0:
            report.append(f"machine {m.id}: processing_height must be positive")
        cids = [cfg.id for cfg in m.configs]
        for cfg in m.configs:
            if cfg.id == INITIAL_CONFIG:
                report.append(f"machine {m.id}: configuration id 0 is reserved")
            if cids.count(cfg.id) > 1:
                report.append(f"machine {m.id}: duplicate configuration id {cfg.id}")
            if cfg.setup_time < 0:
                report.append(f"machine {m.id} config {cfg.id}: negative setup time")
            for oid in sorted(cfg.eligible):
                if oid not in seen_orders:
                    report.append(
                        f"machine {m.id} config {cfg.id}: eligibility for unknown order {oid}"
                    )
                elif cfg.eligible[oid] <= 0:
                    report.append(
                        f"machine {m.id} config {cfg.id}: processing time for order {oid}"
                        f" must be positive"
                    )
        report.extend(_validate_reconfig(m))

    for o in instance.orders:
        if not instance.feasible_pairs(o.id):
            report.append(f"order {o.id}: no feasible machine-configuration")

    if instance.batch_slots <= 0:
        report.append(f"batch_slots must be positive (got {instance.batch_slots})")
    else:
        for m in instance.machines:
            assignable = sum(
                1
                for o in instance.orders
                if any(instance.is_feasible_pair(o, m, cfg) for cfg in m.configs)
            )
            if instance.batch_slots < assignable:
                report.append(
                    f"machine {m.id}: batch_slots {instance.batch_slots} below the"
                    f" {assignable} orders assignable to it"
                )
    return report


def _validate_reconfig(machine: Machine) -> list[str]:
    report: list[str] = []
    cids = set(machine.config_ids())
    nodes = {INITIAL_CONFIG} | cids
    for (a, b), t in sorted(machine.reconfig.items()):
        if a not in nodes or b not in cids:
            report.append(f"machine {machine.id}: reconfig entry ({a},{b}) references unknown configuration")
        elif a == b:
            report.append(f"machine {machine.id}: reconfig entry ({a},{b}) is a self-loop")
        if b == INITIAL_CONFIG:
            report.append(f"machine {machine.id}: reconfig entry ({a},{b}) targets the initial configuration")
        if t < 0:
            report.append(f"machine {machine.id}: reconfig time ({a},{b}) is negative")
    for a in sorted(nodes):
        for b in sorted(cids):
            if a != b and (a, b) not in machine.reconfig:
                report.append(f"machine {machine.id}: reconfig entry ({a},{b}) missing")
    # triangle inequality over defined entries (paths may not re-enter node 0)
    for a in sorted(nodes):
        for b in sorted(cids):
            for c in sorted(cids):
                if a == b or b == c or a == c:
                    continue
                if (a, b) in machine.reconfig and (b, c) in machine.reconfig and (a, c) in machine.reconfig:
                    direct = machine.reconfig[(a, c)]
                    via = machine.reconfig[(a, b)] + machine.reconfig[(b, c)]
                    if direct > via:
                        report.append(
                            f"machine {machine.id}: reconfig triangle violated:"
                            f" T[{a}][{c}]={direct} > T[{a}][{b}]+T[{b}][{c}]={via}"
                        )
    return report


def validate_schedule(instance: Instance, schedule: Schedule) -> list[str]:
    """Check a schedule against the full model semantics: assignment
    eligibility, the single-order batch limit, one configuration per batch,
    height and per-batch area limits, and configuration-sequence consistency.
    """
    report: list[str] = []
    order_ids = {o.id for o in instance.orders}
    machine_ids = {m.id for m in instance.machines}

    for oid in sorted(order_ids):
        if oid not in schedule.assignment:
            report.append(f"order {oid}: not assigned")
    for oid in sorted(schedule.assignment):
        if oid not in order_ids:
            report.append(f"order {oid}: assigned but not in instance")

    for oid, (mid, cid, b) in sorted(schedule.assignment.items()):
        if oid not in order_ids:
            continue
        if mid not in machine_ids:
            report.append(f"order {oid}: assigned to unknown machine {mid}")
            continue
        machine = instance.machine(mid)
        order = instance.order(oid)
        try:
            cfg = machine.config(cid)
        except KeyError:
            report.append(f"order {oid}: assigned to unknown configuration {cid} of machine {mid}")
            continue
        if oid not in cfg.eligible:
            report.append(f"order {oid}: not eligible on machine {mid} config {cid}")
        if order.height > machine.processing_height:
            report.append(
                f"order {oid}: height {order.height} exceeds machine {mid}"
                f" limit {machine.processing_height}"
            )
        if order.area > machine.processing_area:
            report.append(
                f"order {oid}: area {order.area} exceeds machine {mid}"
                f" processing area {machine.processing_area}"
            )
        if not 0 <= b < instance.batch_slots:
            report.append(f"order {oid}: batch index {b} outside 0..{instance.batch_slots - 1}")

    # per-batch checks, deterministic by (machine, batch)
    batches: dict[tuple[int, int], list[int]] = {}
    batch_config: dict[tuple[int, int], set[int]] = {}
    for oid, (mid, cid, b) in schedule.assignment.items():
        if oid not in order_ids or mid not in machine_ids:
            continue
        batches.setdefault((mid, b), []).append(oid)
        batch_config.setdefault((mid, b), set()).add(cid)

    for (mid, b) in sorted(batches):
        members = sorted(batches[(mid, b)])
        configs = batch_config[(mid, b)]
        machine = instance.machine(mid)
        if len(configs) > 1:
            report.append(
                f"machine {mid} batch {b}: mixed configurations {sorted(configs)}"
            )
            continue
        cid = next(iter(configs))
        try:
            cfg = machine.config(cid)
        except KeyError:
            continue
        if cfg.batch_limit and len(members) > 1:
            report.append(
                f"machine {mid} batch {b}: {len(members)} orders but config {cid}"
                f" allows at most one"
            )
        total_area = sum(instance.order(o).area for o in members)
        if total_area > machine.processing_area:
            report.append(
                f"machine {mid} batch {b}: total area {total_area} exceeds"
                f" processing area {machine.processing_area}"
            )

    # config_sequence must list exactly the used configurations, once each
    used: dict[int, set[int]] = {}
    for oid, (mid, cid, _b) in schedule.assignment.items():
        if oid in order_ids and mid in machine_ids:
            used.setdefault(mid, set()).add(cid)
    for mid in sorted(set(used) | set(schedule.config_sequence)):
        seq = schedule.config_sequence.get(mid, ())
        used_here = used.get(mid, set())
        if len(set(seq)) != len(seq):
            report.append(f"machine {mid}: config_sequence repeats a configuration")
        for cid in seq:
            if cid not in used_here:
                report.append(f"machine {mid}: config_sequence lists unused configuration {cid}")
        for cid in sorted(used_here - set(seq)):
            report.append(f"machine {mid}: config_sequence omits used configuration {cid}")
    return report


# ---------------------------------------------------------------------------
# timing


def compute_timing(instance: Instance, schedule: Schedule) -> TimedSchedule:
    """Derive configuration durations, completion times, and the makespan.

    Duration of configuration c on machine m = sum of assigned processing
    times + setup time x number of formed batches.  Completions chain along
    the machine's configuration sequence, starting with the reconfiguration
    from the initial state.  Machines without orders contribute 0.

    Raises ValueError when a machine's config_sequence omits a configuration
    its assignment uses.
    """
    durations: dict[tuple[int, int], int] = {}
    completions: dict[tuple[int, int], int] = {}

    per_machine: dict[int, dict[int, list[tuple[int, int]]]] = {}
    for oid, (mid, cid, b) in schedule.assignment.items():
        per_machine.setdefault(mid, {}).setdefault(cid, []).append((b, oid))

    makespan = 0
    for mid, by_config in per_machine.items():
        machine = instance.machine(mid)
        seq = schedule.config_sequence.get(mid, ())
        missing = set(by_config) - set(seq)
        if missing:
            raise ValueError(
                f"machine {mid}: config_sequence omits used configuration(s)"
                f" {sorted(missing)}"
            )
        prev: int | None = None
        clock = 0
        for cid in seq:
            cfg = machine.config(cid)
            members = by_config.get(cid, [])
            n_batches = len({b for b, _ in members})
            duration = (
                sum(cfg.eligible[oid] for _, oid in members)
                + cfg.setup_time * n_batches
            )
            src = INITIAL_CONFIG if prev is None else prev
            clock += machine.reconfig[(src, cid)] + duration
            durations[(mid, cid)] = duration
            completions[(mid, cid)] = clock
            prev = cid
        if seq:
            makespan = max(makespan, clock)
    return TimedSchedule(
        schedule=schedule,
        config_duration=durations,
        config_completion=completions,
        makespan=makespan,
    )


def canonicalize(instance: Instance, schedule: Schedule) -> Schedule:
    """Group each machine's batches by configuration.

    The order->(machine, config) assignment and the batch partition are kept;
    batch slots are renumbered so batches sharing a configuration become
    contiguous (configurations ordered by first appearance in the original
    batch order), and the config_sequence lists each used configuration once.
    Grouping never increases the makespan of the batch-level interpretation
    of the input ordering, and strictly decreases it by each eliminated
    reconfiguration time.
    """
    new_assignment: dict[int, tuple[int, int, int]] = {}
    new_sequence: dict[int, tuple[int, ...]] = {}

    machines = sorted({m for m, _, _ in schedule.assignment.values()})
    for mid in machines:
        on_machine = schedule.orders_on_machine(mid)
        batch_order: list[tuple[int, int]] = sorted(
            {(b, c) for _, (c, b) in on_machine.items()}
        )
        config_order: list[int] = []
        for _b, c in batch_order:
            if c not in config_order:
                config_order.append(c)
        remap: dict[int, int] = {}
        next_slot = 0
        for c in config_order:
            for b, bc in batch_order:
                if bc == c:
                    remap[b] = next_slot
                    next_slot += 1
        for oid, (c, b) in on_machine.items():
            new_assignment[oid] = (mid, c, remap[b])
        new_sequence[mid] = tuple(config_order)
    return Schedule(assignment=new_assignment, config_sequence=new_sequence)


# ---------------------------------------------------------------------------
# metrics


def gap(objective: float, lower_bound: float) -> float:
    """Optimality gap in percent: (objective - lower_bound) / objective * 100."""
    if objective <= 0:
        raise ValueError(f"objective must be positive (got {objective})")
    return (objective - lower_bound) / objective * 100.0


def rpd(objective: float, best_objective: float) -> float:
    """Relative percentage deviation from the best known objective."""
    if best_objective <= 0:
        raise ValueError(f"best_objective must be positive (got {best_objective})")
    return (objective - best_objective) / best_objective * 100.0
