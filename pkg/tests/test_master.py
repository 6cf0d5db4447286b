"""Master problem: machine bounds, reconfiguration bounds, cuts, search."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from rebatch import (
    Cut,
    GenConfig,
    brute_force,
    evaluate_cut,
    generate,
    machine_lb,
    solve_master,
    static_mrt,
    tight_mrt,
)
from rebatch.lbbd import _sp_inputs
from rebatch.subproblem import solve_subproblem

from conftest import make_instance, make_machine


# ---------------------------------------------------------------------------
# machine_lb


def test_machine_lb_substitution_example():
    machine = make_machine(
        area=100,
        configs={1: {"setup": 7, "eligible": {1: 20, 2: 30}}},
        reconfig={(0, 1): 10},
    )
    inst = make_instance([(1, 50, 100), (2, 60, 100)], [machine])
    assigned = {1: [inst.order(1), inst.order(2)]}
    # 50 processing + 10 reconfiguration + 7 * ceil(110/100)
    assert machine_lb(machine, assigned) == 74


def test_machine_lb_empty():
    assert machine_lb(make_machine(), {}) == 0


def test_machine_lb_batch_limit_counts_orders():
    machine = make_machine(
        configs={1: {"setup": 6, "limit": True, "eligible": {1: 10, 2: 10, 3: 10}}},
        reconfig={(0, 1): 10},
    )
    inst = make_instance([(1, 40, 100), (2, 40, 100), (3, 40, 100)], [machine])
    assigned = {1: [inst.order(1), inst.order(2), inst.order(3)]}
    assert machine_lb(machine, assigned) == 30 + 10 + 18


# ---------------------------------------------------------------------------
# reconfiguration bounds


def _reconfig_machine():
    return make_machine(
        configs={1: {"eligible": {}}, 2: {"eligible": {}}},
        reconfig={(0, 1): 10, (0, 2): 12, (1, 2): 5, (2, 1): 6},
    )


def test_tight_mrt_pair():
    machine = _reconfig_machine()
    assert tight_mrt(machine, {1, 2}) == {1: 6, 2: 5}


def test_tight_mrt_singleton_uses_initial():
    machine = _reconfig_machine()
    assert tight_mrt(machine, {1}) == {1: 10}
    assert tight_mrt(machine, {2}) == {2: 12}


def test_dynamic_mrt_dominates_static_on_random_machines():
    rng = random.Random(3)
    for _ in range(20):
        n = 5
        configs = {c: {"eligible": {}} for c in range(1, n + 1)}
        reconfig = {
            (a, b): rng.randint(5, 40)
            for a in range(0, n + 1)
            for b in range(1, n + 1)
            if a != b
        }
        machine = make_machine(configs=configs, reconfig=reconfig)
        static = static_mrt(machine)
        for size in range(1, n + 1):
            for utilized in itertools.combinations(range(1, n + 1), size):
                dynamic = tight_mrt(machine, set(utilized))
                for c in utilized:
                    assert dynamic[c] >= static[c]
                assert sum(dynamic.values()) >= sum(static[c] for c in utilized)


# ---------------------------------------------------------------------------
# cuts


def test_evaluate_cut_binding_when_matched():
    cut = Cut(machine_id=1, assignment_set=frozenset({(1, 1), (2, 1)}), bound=80)
    assert evaluate_cut(cut, {1: (1, 1), 2: (1, 1), 3: (2, 1)}) == 80


def test_evaluate_cut_single_move_nonbinding():
    cut = Cut(machine_id=1, assignment_set=frozenset({(1, 1), (2, 1)}), bound=80)
    assert evaluate_cut(cut, {1: (2, 1), 2: (1, 1)}) == 0


def test_evaluate_cut_two_moves_negative():
    cut = Cut(machine_id=1, assignment_set=frozenset({(1, 1), (2, 1)}), bound=80)
    assert evaluate_cut(cut, {1: (2, 1), 2: (2, 1)}) == -80


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_cut_binds_iff_fixed_set_recurs(data):
    n_orders = data.draw(st.integers(min_value=1, max_value=6))
    pairs = {
        oid: (data.draw(st.integers(1, 2)), data.draw(st.integers(1, 3)))
        for oid in range(1, n_orders + 1)
    }
    cut_orders = data.draw(
        st.sets(st.integers(1, n_orders), min_size=1, max_size=n_orders)
    )
    machine_id = data.draw(st.integers(1, 2))
    fixed = frozenset((oid, data.draw(st.integers(1, 3))) for oid in cut_orders)
    bound = data.draw(st.integers(1, 1000))
    cut = Cut(machine_id=machine_id, assignment_set=fixed, bound=bound)
    value = evaluate_cut(cut, pairs)
    matched = all(pairs.get(o) == (machine_id, c) for (o, c) in fixed)
    if matched:
        assert value == bound
    else:
        assert value <= 0


# ---------------------------------------------------------------------------
# solve_master


def test_solve_master_picks_cheaper_pair():
    m1 = make_machine(
        mid=1, configs={1: {"setup": 7, "eligible": {1: 57}}}, reconfig={(0, 1): 10}
    )
    m2 = make_machine(
        mid=2, configs={1: {"setup": 5, "eligible": {1: 45}}}, reconfig={(0, 1): 10}
    )
    inst = make_instance([(1, 40, 100)], [m1, m2])
    sol = solve_master(inst)
    assert sol.assignment[1] == (2, 1)
    assert sol.objective == 60
    assert sol.proven_gap == 0.0


def test_solve_master_is_relaxation_of_oracle():
    for seed in range(25):
        inst = generate(
            GenConfig(n_orders=3 + seed % 4, n_machines=2, n_configs_per_machine=2, seed=seed)
        )
        _, optimum = brute_force(inst)
        sol = solve_master(inst)
        assert sol.objective <= optimum


def test_solve_master_deterministic():
    inst = generate(GenConfig(n_orders=8, n_machines=2, n_configs_per_machine=3, seed=77))
    a = solve_master(inst)
    b = solve_master(inst)
    assert a == b


def test_solve_master_respects_cut():
    inst = generate(GenConfig(n_orders=4, n_machines=2, n_configs_per_machine=2, seed=11))
    base = solve_master(inst)
    # fix the current solution of some machine at a prohibitive bound
    target = max(base.utilized, key=lambda m: len(base.utilized[m]))
    pairs = frozenset(
        (oid, cid) for oid, (m, cid) in base.assignment.items() if m == target
    )
    if not pairs:
        pytest.skip("degenerate split")
    cut = Cut(machine_id=target, assignment_set=pairs, bound=base.objective + 500)
    sol = solve_master(inst, cuts=[cut])
    # either the assignment moved off the fixed set, or the bound applies
    same = all(sol.assignment.get(o) == (target, c) for (o, c) in pairs)
    if same:
        assert sol.objective >= base.objective + 500
    else:
        assert evaluate_cut(cut, sol.assignment) <= 0
    # exhaustive check: the new objective is the true constrained optimum
    choices = {o.id: inst.feasible_pairs(o.id) for o in inst.orders}
    best = None
    for combo in itertools.product(*(choices[o.id] for o in inst.orders)):
        assignment = {o.id: pair for o, pair in zip(inst.orders, combo)}
        per_machine = {}
        for oid, (mid, cid) in assignment.items():
            per_machine.setdefault(mid, {}).setdefault(cid, []).append(inst.order(oid))
        obj = max(
            machine_lb(inst.machine(m.id), per_machine.get(m.id, {}))
            for m in inst.machines
        )
        obj = max(obj, evaluate_cut(cut, assignment))
        if best is None or obj < best:
            best = obj
    assert sol.objective == best


def test_machine_lb_below_subproblem_makespan():
    rng = random.Random(1)
    checked = 0
    for seed in range(40):
        inst = generate(
            GenConfig(n_orders=6, n_machines=2, n_configs_per_machine=3, seed=1000 + seed)
        )
        assignment = {
            o.id: rng.choice(inst.feasible_pairs(o.id)) for o in inst.orders
        }
        for mid, sp in _sp_inputs(inst, assignment, None).items():
            machine = inst.machine(mid)
            assigned = {
                cid: [inst.order(oid) for (oid, _, _) in entries]
                for cid, entries in sp.orders_by_config.items()
            }
            makespan = solve_subproblem(sp).makespan
            lb_static = machine_lb(machine, assigned, "static")
            lb_dynamic = machine_lb(machine, assigned, "dynamic")
            assert lb_static <= lb_dynamic <= makespan
            checked += 1
    assert checked >= 60


def test_machine_lb_rejects_unknown_mode():
    machine = make_machine(configs={1: {"eligible": {1: 5}}})
    inst = make_instance([(1, 40, 100)], [machine])
    with pytest.raises(ValueError, match="mrt_mode"):
        machine_lb(machine, {1: [inst.order(1)]}, "fancy")
