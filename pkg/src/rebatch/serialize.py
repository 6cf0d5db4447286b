"""JSON file formats for instances and schedules.

Instance files carry integer times and areas; each configuration's
``eligible`` object maps order id to processing time, and ``reconfig`` keys
are "from,to" strings (from may be 0, the initial configuration).  Unknown
keys are rejected.  Serialization is canonical (sorted keys, two-space
indent, LF), so equal in-memory values produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import Instance, Machine, MachineConfig, Order, OrderKind, Schedule


def _check_keys(data: dict, allowed: set[str], context: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"{context}: unknown key(s) {sorted(unknown)}")
    missing = allowed - set(data)
    if missing:
        raise ValueError(f"{context}: missing key(s) {sorted(missing)}")


def _int(value, context: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{context}: expected an integer, got {value!r}")
    return value


def instance_to_dict(instance: Instance) -> dict:
    return {
        "orders": [
            {"id": o.id, "kind": o.kind.value, "area": o.area, "height": o.height}
            for o in instance.orders
        ],
        "machines": [
            {
                "id": m.id,
                "processing_area": m.processing_area,
                "processing_height": m.processing_height,
                "configs": [
                    {
                        "id": c.id,
                        "setup_time": c.setup_time,
                        "batch_limit": c.batch_limit,
                        "eligible": {str(oid): t for oid, t in sorted(c.eligible.items())},
                    }
                    for c in m.configs
                ],
                "reconfig": {
                    f"{a},{b}": t for (a, b), t in sorted(m.reconfig.items())
                },
            }
            for m in instance.machines
        ],
        "batch_slots": instance.batch_slots,
    }


def instance_from_dict(data: dict) -> Instance:
    _check_keys(data, {"orders", "machines", "batch_slots"}, "instance")
    orders = []
    for entry in data["orders"]:
        _check_keys(entry, {"id", "kind", "area", "height"}, "order")
        if entry["kind"] not in ("M", "R"):
            raise ValueError(f"order {entry['id']}: kind must be 'M' or 'R'")
        orders.append(
            Order(
                id=_int(entry["id"], "order id"),
                kind=OrderKind(entry["kind"]),
                area=_int(entry["area"], "order area"),
                height=_int(entry["height"], "order height"),
            )
        )
    machines = []
    for entry in data["machines"]:
        _check_keys(
            entry,
            {"id", "processing_area", "processing_height", "configs", "reconfig"},
            "machine",
        )
        configs = []
        for centry in entry["configs"]:
            _check_keys(centry, {"id", "setup_time", "batch_limit", "eligible"}, "config")
            if not isinstance(centry["batch_limit"], bool):
                raise ValueError("config batch_limit must be a boolean")
            configs.append(
                MachineConfig(
                    id=_int(centry["id"], "config id"),
                    setup_time=_int(centry["setup_time"], "setup_time"),
                    batch_limit=centry["batch_limit"],
                    eligible={
                        int(oid): _int(t, "processing time")
                        for oid, t in centry["eligible"].items()
                    },
                )
            )
        reconfig = {}
        for key, t in entry["reconfig"].items():
            a, _, b = key.partition(",")
            reconfig[(int(a), int(b))] = _int(t, f"reconfig {key}")
        machines.append(
            Machine(
                id=_int(entry["id"], "machine id"),
                processing_area=_int(entry["processing_area"], "processing_area"),
                processing_height=_int(entry["processing_height"], "processing_height"),
                configs=tuple(configs),
                reconfig=reconfig,
            )
        )
    return Instance(
        orders=tuple(orders),
        machines=tuple(machines),
        batch_slots=_int(data["batch_slots"], "batch_slots"),
    )


def schedule_to_dict(schedule: Schedule, makespan: int) -> dict:
    return {
        "assignment": {
            str(oid): list(schedule.assignment[oid]) for oid in sorted(schedule.assignment)
        },
        "config_sequence": {
            str(mid): list(schedule.config_sequence[mid])
            for mid in sorted(schedule.config_sequence)
        },
        "makespan": makespan,
    }


def schedule_from_dict(data: dict) -> tuple[Schedule, int]:
    _check_keys(data, {"assignment", "config_sequence", "makespan"}, "schedule")
    assignment = {}
    for oid, triple in data["assignment"].items():
        if len(triple) != 3:
            raise ValueError(f"assignment for order {oid} must be [machine, config, batch]")
        assignment[int(oid)] = (int(triple[0]), int(triple[1]), int(triple[2]))
    sequence = {
        int(mid): tuple(int(c) for c in seq)
        for mid, seq in data["config_sequence"].items()
    }
    return (
        Schedule(assignment=assignment, config_sequence=sequence),
        _int(data["makespan"], "makespan"),
    )


def dumps_canonical(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def save_instance(path: str | Path, instance: Instance) -> None:
    Path(path).write_text(dumps_canonical(instance_to_dict(instance)), encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_schedule(path: str | Path, schedule: Schedule, makespan: int) -> None:
    Path(path).write_text(
        dumps_canonical(schedule_to_dict(schedule, makespan)), encoding="utf-8"
    )


def load_schedule(path: str | Path) -> tuple[Schedule, int]:
    return schedule_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
