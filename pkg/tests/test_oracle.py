"""Exhaustive oracle: worked examples, symmetry, refusal, dominance over
arbitrary valid schedules."""

from __future__ import annotations

import random

import pytest

from rebatch import (
    GenConfig,
    Instance,
    Machine,
    MachineConfig,
    OracleLimitError,
    OracleLimits,
    Order,
    brute_force,
    compute_timing,
    generate,
    validate_schedule,
)

from conftest import make_instance, make_machine, random_valid_schedule


def test_two_orders_one_batch():
    machine = make_machine(
        configs={1: {"setup": 5, "eligible": {1: 20, 2: 30}}}, reconfig={(0, 1): 10}
    )
    inst = make_instance([(1, 40, 100), (2, 40, 100)], [machine])
    timed, makespan = brute_force(inst)
    assert makespan == 65
    assert timed.makespan == 65


def test_two_orders_forced_split():
    machine = make_machine(
        configs={1: {"setup": 5, "eligible": {1: 20, 2: 30}}}, reconfig={(0, 1): 10}
    )
    inst = make_instance([(1, 60, 100), (2, 60, 100)], [machine])
    _, makespan = brute_force(inst)
    assert makespan == 70


def test_picks_cheaper_machine():
    m1 = make_machine(
        mid=1, configs={1: {"setup": 5, "eligible": {1: 50}}}, reconfig={(0, 1): 10}
    )
    m2 = make_machine(
        mid=2, configs={1: {"setup": 5, "eligible": {1: 45}}}, reconfig={(0, 1): 10}
    )
    inst = make_instance([(1, 40, 100)], [m1, m2])
    timed, makespan = brute_force(inst)
    assert makespan == 60
    assert timed.schedule.assignment[1][0] == 2


def test_oracle_schedule_validates_and_times_consistently():
    for seed in range(15):
        inst = generate(
            GenConfig(n_orders=4, n_machines=2, n_configs_per_machine=2, seed=seed)
        )
        timed, makespan = brute_force(inst)
        assert validate_schedule(inst, timed.schedule) == []
        assert compute_timing(inst, timed.schedule).makespan == makespan


def test_oracle_below_random_valid_schedules():
    rng = random.Random(2)
    for seed in range(10):
        inst = generate(
            GenConfig(n_orders=5, n_machines=2, n_configs_per_machine=2, seed=200 + seed)
        )
        _, optimum = brute_force(inst)
        for _ in range(10):
            sched = random_valid_schedule(inst, rng)
            assert compute_timing(inst, sched).makespan >= optimum


def _relabel(inst: Instance, order_map: dict[int, int], machine_map: dict[int, int]) -> Instance:
    orders = tuple(
        Order(id=order_map[o.id], kind=o.kind, area=o.area, height=o.height)
        for o in inst.orders
    )
    machines = tuple(
        Machine(
            id=machine_map[m.id],
            processing_area=m.processing_area,
            processing_height=m.processing_height,
            configs=tuple(
                MachineConfig(
                    id=c.id,
                    setup_time=c.setup_time,
                    batch_limit=c.batch_limit,
                    eligible={order_map[o]: t for o, t in c.eligible.items()},
                )
                for c in m.configs
            ),
            reconfig=dict(m.reconfig),
        )
        for m in inst.machines
    )
    return Instance(orders=orders, machines=machines, batch_slots=inst.batch_slots)


def test_relabeling_invariance():
    for seed in (5, 17):
        inst = generate(GenConfig(n_orders=4, n_machines=2, n_configs_per_machine=2, seed=seed))
        _, base = brute_force(inst)
        order_ids = [o.id for o in inst.orders]
        order_map = dict(zip(order_ids, reversed(order_ids)))
        machine_map = {1: 2, 2: 1}
        _, relabeled = brute_force(_relabel(inst, order_map, machine_map))
        assert relabeled == base


def test_refuses_beyond_limits():
    inst = generate(GenConfig(n_orders=9, n_machines=2, n_configs_per_machine=2, seed=1))
    with pytest.raises(OracleLimitError, match="orders exceed"):
        brute_force(inst, OracleLimits(max_orders=7))
    small = generate(GenConfig(n_orders=4, n_machines=2, n_configs_per_machine=2, seed=1))
    with pytest.raises(OracleLimitError, match="node budget"):
        brute_force(small, OracleLimits(node_budget=1))


def test_refuses_too_many_machines_or_configs():
    wide = generate(GenConfig(n_orders=3, n_machines=3, n_configs_per_machine=2, seed=1))
    with pytest.raises(OracleLimitError, match="machines exceed"):
        brute_force(wide)
    deep = generate(GenConfig(n_orders=3, n_machines=2, n_configs_per_machine=4, seed=1))
    with pytest.raises(OracleLimitError, match="configurations"):
        brute_force(deep)
