"""Assignment master problem with Benders optimality cuts.

Assigns every order to an eligible (machine, configuration) pair minimizing a
surrogate objective: the largest per-machine completion-time estimate
(processing + minimum reconfiguration per utilized configuration + a
batch-count setup estimate) or the bound of any accumulated cut whose fixed
assignment recurs.  Solved exactly by best-first branch-and-bound over
per-order choices; an optional optimality gap and time limit allow early
termination with a proven bound.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import INITIAL_CONFIG, Instance, Machine, Order, gap

_EPS = 1e-6  # guards float round-up before integer ceilings in bounds


@dataclass(frozen=True)
class Cut:
    """One optimality cut: a machine's fixed (order, config) assignment set
    and the machine's proven subproblem makespan under it."""

    machine_id: int
    assignment_set: frozenset[tuple[int, int]]
    bound: int


@dataclass(frozen=True)
class MasterSolution:
    assignment: dict[int, tuple[int, int]]
    utilized: dict[int, tuple[int, ...]]
    machine_estimates: dict[int, int]
    objective: int
    lower_bound: int
    proven_gap: float


def static_mrt(machine: Machine) -> dict[int, int]:
    """Minimum reconfiguration time into each configuration, over all other
    configurations including the initial one."""
    out: dict[int, int] = {}
    for cfg in machine.configs:
        out[cfg.id] = min(
            t for (a, b), t in machine.reconfig.items() if b == cfg.id
        )
    return out


def tight_mrt(machine: Machine, utilized: set[int]) -> dict[int, int]:
    """Minimum reconfiguration time into each utilized configuration when
    only the initial state and the utilized set are available as sources.
    Always >= the static value, giving a tighter machine bound."""
    out: dict[int, int] = {}
    for c in sorted(utilized):
        sources = ({INITIAL_CONFIG} | utilized) - {c}
        out[c] = min(machine.reconfig[(a, c)] for a in sorted(sources))
    return out


def machine_lb(
    machine: Machine,
    assigned: Mapping[int, Sequence[Order]],
    mrt_mode: str = "static",
) -> int:
    """Lower bound on the machine's subproblem makespan for an assignment.

    Processing times plus, per utilized configuration, the minimum
    reconfiguration into it and a setup estimate: ceil(area/capacity) batches
    for unrestricted configurations, one batch per order under a batch limit.
    """
    utilized = {c for c, orders in assigned.items() if orders}
    if not utilized:
        return 0
    if mrt_mode == "static":
        mrt = static_mrt(machine)
    elif mrt_mode == "dynamic":
        mrt = tight_mrt(machine, utilized)
    else:
        raise ValueError(f"unknown mrt_mode {mrt_mode!r}")
    total = 0
    for c in sorted(utilized):
        cfg = machine.config(c)
        orders = assigned[c]
        total += sum(cfg.eligible[o.id] for o in orders) + mrt[c]
        if cfg.batch_limit:
            total += cfg.setup_time * len(orders)
        else:
            area = sum(o.area for o in orders)
            total += cfg.setup_time * math.ceil(area / machine.processing_area)
    return total


def evaluate_cut(cut: Cut, assignment: Mapping[int, tuple[int, int]]) -> int:
    """Value the cut imposes on an assignment: bound * (1 - d) where d counts
    fixed pairs absent from the assignment.  Non-positive results bind
    nothing, so a cut never excludes an assignment that moved any order."""
    absent = sum(
        1
        for (oid, cid) in cut.assignment_set
        if assignment.get(oid) != (cut.machine_id, cid)
    )
    return cut.bound * (1 - absent)


# ---------------------------------------------------------------------------
# branch-and-bound search


class _Problem:
    """Precomputed search context for one solve_master call."""

    def __init__(self, instance: Instance, cuts: Sequence[Cut], mrt_mode: str):
        self.instance = instance
        self.cuts = list(cuts)
        self.mrt_mode = mrt_mode
        self.machines = list(instance.machines)
        self.n_machines = len(self.machines)

        self.opt: dict[tuple[int, int, int], int] = {}
        self.bst: dict[tuple[int, int], int] = {}
        self.bl: dict[tuple[int, int], bool] = {}
        self.mpa: dict[int, int] = {}
        self.mrt_static: dict[tuple[int, int], int] = {}
        for m in self.machines:
            self.mpa[m.id] = m.processing_area
            mrt = static_mrt(m)
            for cfg in m.configs:
                self.bst[(m.id, cfg.id)] = cfg.setup_time
                self.bl[(m.id, cfg.id)] = cfg.batch_limit
                self.mrt_static[(m.id, cfg.id)] = mrt[cfg.id]

        self.choices: dict[int, list[tuple[int, int]]] = {}
        self.area: dict[int, int] = {}
        self.order_by_id = {o.id: o for o in instance.orders}
        for o in instance.orders:
            self.area[o.id] = o.area
            pairs = instance.feasible_pairs(o.id)
            if not pairs:
                raise ValueError(f"order {o.id} has no feasible machine-configuration")
            if len(pairs) > 255:
                raise ValueError(
                    f"order {o.id} has {len(pairs)} choices; search nodes encode"
                    f" at most 255 per order"
                )
            for (mid, cid) in pairs:
                self.opt[(o.id, mid, cid)] = instance.machine(mid).config(cid).eligible[o.id]
            self.choices[o.id] = pairs

        # branch orders by descending largest processing time
        self.branch_order = sorted(
            (o.id for o in instance.orders),
            key=lambda oid: (
                -max(self.opt[(oid, m, c)] for (m, c) in self.choices[oid]),
                oid,
            ),
        )
        self.position = {oid: i for i, oid in enumerate(self.branch_order)}
        n = len(self.branch_order)

        # per-order floors used in node bounds
        min_single: dict[int, int] = {}
        min_weight: dict[int, float] = {}
        for oid, pairs in self.choices.items():
            single = []
            weight = []
            for (m, c) in pairs:
                opt = self.opt[(oid, m, c)]
                single.append(opt + self.bst[(m, c)] + self.mrt_static[(m, c)])
                if self.bl[(m, c)]:
                    weight.append(opt + self.bst[(m, c)])
                else:
                    weight.append(opt + self.bst[(m, c)] * self.area[oid] / self.mpa[m])
            min_single[oid] = min(single)
            min_weight[oid] = min(weight)

        self.suffix_weight = [0.0] * (n + 1)
        self.suffix_single = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            oid = self.branch_order[i]
            self.suffix_weight[i] = self.suffix_weight[i + 1] + min_weight[oid]
            self.suffix_single[i] = max(self.suffix_single[i + 1], min_single[oid])

        # a cut can only be fully matched once all its orders are branched
        self.cut_ready: dict[int, list[int]] = {}
        for idx, cut in enumerate(self.cuts):
            ready = max((self.position[oid] for oid, _ in cut.assignment_set), default=-1)
            self.cut_ready.setdefault(ready + 1, []).append(idx)


class _State:
    """Committed per-machine loads for a partial assignment."""

    def __init__(self, prob: _Problem):
        self.prob = prob
        self.cfg_load: dict[tuple[int, int], list[int]] = {}  # (m,c) -> [opt, area, count]
        self.int_lb: dict[int, int] = {m.id: 0 for m in prob.machines}
        self.frac_lb: dict[int, float] = {m.id: 0.0 for m in prob.machines}
        self.frac_total = 0.0

    def _terms(self, key: tuple[int, int], load: list[int]) -> tuple[int, float]:
        if load[2] == 0:
            return 0, 0.0
        prob = self.prob
        base = load[0] + prob.mrt_static[key]
        if prob.bl[key]:
            setup = prob.bst[key] * load[2]
            return base + setup, base + setup
        mpa = prob.mpa[key[0]]
        setups_int = prob.bst[key] * math.ceil(load[1] / mpa)
        setups_frac = prob.bst[key] * load[1] / mpa
        return base + setups_int, base + setups_frac

    def add(self, oid: int, mid: int, cid: int) -> None:
        key = (mid, cid)
        load = self.cfg_load.setdefault(key, [0, 0, 0])
        old_int, old_frac = self._terms(key, load)
        load[0] += self.prob.opt[(oid, mid, cid)]
        load[1] += self.prob.area[oid]
        load[2] += 1
        new_int, new_frac = self._terms(key, load)
        self.int_lb[mid] += new_int - old_int
        self.frac_lb[mid] += new_frac - old_frac
        self.frac_total += new_frac - old_frac

    def remove(self, oid: int, mid: int, cid: int) -> None:
        key = (mid, cid)
        load = self.cfg_load[key]
        old_int, old_frac = self._terms(key, load)
        load[0] -= self.prob.opt[(oid, mid, cid)]
        load[1] -= self.prob.area[oid]
        load[2] -= 1
        new_int, new_frac = self._terms(key, load)
        self.int_lb[mid] += new_int - old_int
        self.frac_lb[mid] += new_frac - old_frac
        self.frac_total += new_frac - old_frac


def _leaf_objective(
    prob: _Problem, assignment: Mapping[int, tuple[int, int]]
) -> tuple[int, dict[int, int]]:
    """Exact surrogate objective of a complete assignment, with the
    per-machine estimates under the requested mrt mode."""
    per_machine: dict[int, dict[int, list[Order]]] = {}
    for oid, (mid, cid) in assignment.items():
        per_machine.setdefault(mid, {}).setdefault(cid, []).append(
            prob.order_by_id[oid]
        )
    estimates = {
        m.id: machine_lb(m, per_machine.get(m.id, {}), prob.mrt_mode)
        for m in prob.machines
    }
    obj = max(estimates.values(), default=0)
    for cut in prob.cuts:
        obj = max(obj, evaluate_cut(cut, assignment))
    return obj, estimates


def _load_score(state: _State) -> tuple[tuple[int, ...], float]:
    """Lexicographic min-max score: sorted machine estimates (worst first),
    then the fractional total as a plateau tie-breaker."""
    return tuple(sorted(state.int_lb.values(), reverse=True)), state.frac_total


def _greedy_complete(
    prob: _Problem,
    state: _State,
    assignment: dict[int, tuple[int, int]],
    from_depth: int,
) -> None:
    """Greedily assign the orders from branch position ``from_depth`` on,
    mutating state and assignment in place."""
    for i in range(from_depth, len(prob.branch_order)):
        oid = prob.branch_order[i]
        best_key = None
        best_val = None
        for (mid, cid) in prob.choices[oid]:
            state.add(oid, mid, cid)
            val = (_load_score(state), mid, cid)
            state.remove(oid, mid, cid)
            if best_val is None or val < best_val:
                best_val = val
                best_key = (mid, cid)
        assignment[oid] = best_key
        state.add(oid, *best_key)


def _improve(
    prob: _Problem,
    assignment: dict[int, tuple[int, int]],
    max_rounds: int = 40,
) -> dict[int, tuple[int, int]]:
    """Deterministic local search on a complete assignment: steepest
    single-order reassignments plus one bottleneck swap per round, driving
    the sorted machine-estimate vector down."""
    assignment = dict(assignment)
    state = _State(prob)
    for oid, (mid, cid) in assignment.items():
        state.add(oid, mid, cid)
    oids = sorted(assignment)
    for _ in range(max_rounds):
        improved = False
        for oid in oids:
            cur = assignment[oid]
            state.remove(oid, *cur)
            best_pair = cur
            state.add(oid, *cur)
            best_val = _load_score(state)
            state.remove(oid, *cur)
            for pair in prob.choices[oid]:
                if pair == cur:
                    continue
                state.add(oid, *pair)
                val = _load_score(state)
                state.remove(oid, *pair)
                if val < best_val:
                    best_val = val
                    best_pair = pair
            state.add(oid, *best_pair)
            if best_pair != cur:
                assignment[oid] = best_pair
                improved = True
        # one swap around the most loaded machine per round
        cur_val = _load_score(state)
        bottleneck = max(state.int_lb, key=lambda m: (state.int_lb[m], m))
        on_bottleneck = sorted(o for o, (m, _) in assignment.items() if m == bottleneck)
        elsewhere = sorted(o for o, (m, _) in assignment.items() if m != bottleneck)
        swapped = False
        for o1 in on_bottleneck:
            if swapped:
                break
            p1 = assignment[o1]
            for o2 in elsewhere:
                p2 = assignment[o2]
                to2 = [p for p in prob.choices[o1] if p[0] == p2[0]]
                to1 = [p for p in prob.choices[o2] if p[0] == p1[0]]
                if not to2 or not to1:
                    continue
                state.remove(o1, *p1)
                state.remove(o2, *p2)
                best = None
                for q1 in to2:
                    for q2 in to1:
                        state.add(o1, *q1)
                        state.add(o2, *q2)
                        val = _load_score(state)
                        state.remove(o1, *q1)
                        state.remove(o2, *q2)
                        if val < cur_val and (best is None or val < best[0]):
                            best = (val, q1, q2)
                if best is None:
                    state.add(o1, *p1)
                    state.add(o2, *p2)
                else:
                    _, q1, q2 = best
                    state.add(o1, *q1)
                    state.add(o2, *q2)
                    assignment[o1] = q1
                    assignment[o2] = q2
                    improved = True
                    swapped = True
                    break
        if not improved:
            break
    return assignment


def _greedy_assignment(prob: _Problem) -> dict[int, tuple[int, int]]:
    """Balance-aware greedy dive followed by local search."""
    state = _State(prob)
    assignment: dict[int, tuple[int, int]] = {}
    _greedy_complete(prob, state, assignment, 0)
    return _improve(prob, assignment)


def solve_master(
    instance: Instance,
    cuts: Sequence[Cut] = (),
    gap_limit: float = 0.0,
    time_limit: float | None = None,
    incumbent: MasterSolution | None = None,
    mrt_mode: str = "static",
    max_open_nodes: int = 6_000_000,
) -> MasterSolution:
    """Minimize the surrogate objective over all eligible assignments.

    Returns the best assignment found together with a proven optimality gap:
    0 when the search completed, otherwise derived from the smallest bound of
    any unexplored node.  Deterministic for identical inputs whenever the
    time limit does not truncate the search.
    """
    prob = _Problem(instance, cuts, mrt_mode)
    n = len(prob.branch_order)
    deadline = time.monotonic() + time_limit if time_limit is not None else None

    best_assignment = _greedy_assignment(prob)
    best_obj, _ = _leaf_objective(prob, best_assignment)
    if incumbent is not None:
        for cand in (dict(incumbent.assignment), _improve(prob, incumbent.assignment)):
            cand_obj, _ = _leaf_objective(prob, cand)
            if cand_obj < best_obj:
                best_obj = cand_obj
                best_assignment = cand

    lb = 0
    counter = 0
    expansions = 0
    # node: (bound, counter, depth, assignment bytes, matched cut bound)
    heap: list[tuple[int, int, int, bytes, int]] = [(0, 0, 0, b"", 0)]
    state = _State(prob)
    stopped_early = False

    while heap:
        bound, _, depth, vec, matched = heapq.heappop(heap)
        lb = max(lb, bound)
        if lb >= best_obj:
            lb = best_obj
            break
        if best_obj > 0 and gap(best_obj, lb) <= gap_limit:
            stopped_early = True
            break
        counter += 1
        if deadline is not None and counter % 512 == 0 and time.monotonic() > deadline:
            stopped_early = True
            break
        if len(heap) > max_open_nodes:
            stopped_early = True
            break

        if depth == n:
            assignment = {
                prob.branch_order[i]: prob.choices[prob.branch_order[i]][vec[i]]
                for i in range(n)
            }
            obj, _ = _leaf_objective(prob, assignment)
            improved = _improve(prob, assignment)
            improved_obj, _ = _leaf_objective(prob, improved)
            if improved_obj < obj:
                obj, assignment = improved_obj, improved
            if obj < best_obj:
                best_obj = obj
                best_assignment = assignment
            continue

        # rebuild committed loads for this node
        added: list[tuple[int, int, int]] = []
        partial: dict[int, tuple[int, int]] = {}
        for i in range(depth):
            oid = prob.branch_order[i]
            mid, cid = prob.choices[oid][vec[i]]
            state.add(oid, mid, cid)
            added.append((oid, mid, cid))
            partial[oid] = (mid, cid)

        oid = prob.branch_order[depth]
        child_depth = depth + 1
        for pair_idx, (mid, cid) in enumerate(prob.choices[oid]):
            state.add(oid, mid, cid)
            partial[oid] = (mid, cid)
            child_matched = matched
            for cut_idx in prob.cut_ready.get(child_depth, ()):
                cut = prob.cuts[cut_idx]
                if all(
                    partial.get(o) == (cut.machine_id, c)
                    for o, c in cut.assignment_set
                ):
                    child_matched = max(child_matched, cut.bound)
            global_lb = math.ceil(
                (state.frac_total + prob.suffix_weight[child_depth])
                / prob.n_machines
                - _EPS
            )
            child_bound = max(
                bound,
                max(state.int_lb.values()),
                global_lb,
                prob.suffix_single[child_depth],
                child_matched,
            )
            state.remove(oid, mid, cid)
            if child_bound < best_obj:
                counter += 1
                heapq.heappush(
                    heap,
                    (child_bound, counter, child_depth, vec + bytes([pair_idx]), child_matched),
                )
        del partial[oid]

        # periodic dive: complete this node greedily to chase the incumbent
        expansions += 1
        if expansions % 512 == 0:
            dive = dict(partial)
            _greedy_complete(prob, state, dive, depth)
            dive_obj, _ = _leaf_objective(prob, dive)
            if dive_obj < best_obj * 1.05:
                refined = _improve(prob, dive, max_rounds=12)
                refined_obj, _ = _leaf_objective(prob, refined)
                if refined_obj < dive_obj:
                    dive, dive_obj = refined, refined_obj
            if dive_obj < best_obj:
                best_obj = dive_obj
                best_assignment = dive
            for i in range(depth, n):
                o = prob.branch_order[i]
                state.remove(o, *dive[o])

        for (o, m, c) in reversed(added):
            state.remove(o, m, c)

    if not heap and not stopped_early:
        lb = best_obj  # search exhausted: optimality proven

    lb = min(lb, best_obj)
    objective, estimates = _leaf_objective(prob, best_assignment)
    utilized = {
        m.id: tuple(sorted({c for (o, (mm, c)) in best_assignment.items() if mm == m.id}))
        for m in prob.machines
    }
    proven = gap(objective, lb) if objective > 0 else 0.0
    return MasterSolution(
        assignment=best_assignment,
        utilized=utilized,
        machine_estimates=estimates,
        objective=objective,
        lower_bound=lb,
        proven_gap=max(0.0, proven),
    )
