"""Emit the full makespan MILP in CPLEX LP file format.

Variables: x_o_b_m_c (order o in batch b of machine m under configuration c),
y_b_m_c (batch formed), z_m_c_cp (configuration c' follows c on machine m),
w_m_c (configuration utilized), cd_m_c / cct_m_c (configuration duration and
completion), and Cmax.  x variables exist only for eligible (o, m, c) triples
whose order fits the machine's height and area; everything else is elided.

Output is deterministic: fixed row and column order, LF line endings.
"""

from __future__ import annotations

from .model import INITIAL_CONFIG, Instance, validate_instance


def horizon_bound(instance: Instance) -> int:
    """A provable upper bound on the makespan, used as the big-M constant.

    Sum over orders of the worst eligible processing time, plus for every
    machine configuration one setup and the worst reconfiguration into it.
    """
    total = 0
    for o in instance.orders:
        worst = 0
        for m in instance.machines:
            for cfg in m.configs:
                if instance.is_feasible_pair(o, m, cfg):
                    worst = max(worst, cfg.eligible[o.id])
        total += worst
    for m in instance.machines:
        for cfg in m.configs:
            into = [t for (a, b), t in m.reconfig.items() if b == cfg.id]
            total += cfg.setup_time + (max(into) if into else 0)
    return total


def _terms(parts: list[tuple[int, str]]) -> str:
    out = []
    for coef, name in parts:
        if coef >= 0:
            out.append(f"+ {coef} {name}")
        else:
            out.append(f"- {-coef} {name}")
    return " ".join(out)


def emit_milp(instance: Instance) -> str:
    """Serialize the complete MILP for the instance as LP-format text."""
    violations = validate_instance(instance)
    if violations:
        raise ValueError(f"invalid instance: {violations[0]}")

    n_orders = len(instance.orders)
    slots = range(instance.batch_slots)
    big_m = horizon_bound(instance)

    def xes(o: int, b: int, m: int, c: int) -> str:
        return f"x_{o}_{b}_{m}_{c}"

    # eligible order lists per (machine, config), after height/area elision
    eligible: dict[tuple[int, int], list[int]] = {}
    for m in instance.machines:
        for cfg in m.configs:
            eligible[(m.id, cfg.id)] = [
                o.id for o in instance.orders if instance.is_feasible_pair(o, m, cfg)
            ]

    rows: list[str] = []

    # Each order lands in exactly one batch of one eligible machine-configuration.
    for o in instance.orders:
        parts = [
            (1, xes(o.id, b, m.id, cfg.id))
            for m in instance.machines
            for cfg in m.configs
            if o.id in eligible[(m.id, cfg.id)]
            for b in slots
        ]
        rows.append(f" assign_{o.id}: {_terms(parts)} = 1")

    # Single-order batches where the configuration's batch limit applies.
    for m in instance.machines:
        for cfg in m.configs:
            if not cfg.batch_limit:
                continue
            for b in slots:
                parts = [(1, xes(o, b, m.id, cfg.id)) for o in eligible[(m.id, cfg.id)]]
                if parts:
                    rows.append(f" bl_{b}_{m.id}_{cfg.id}: {_terms(parts)} <= 1")

    # A batch slot takes at most one configuration.
    for m in instance.machines:
        for b in slots:
            parts = [(1, f"y_{b}_{m.id}_{cfg.id}") for cfg in m.configs]
            rows.append(f" onecfg_{b}_{m.id}: {_terms(parts)} <= 1")

    # Orders can only join formed batches.
    for m in instance.machines:
        for cfg in m.configs:
            for b in slots:
                parts = [(1, xes(o, b, m.id, cfg.id)) for o in eligible[(m.id, cfg.id)]]
                if not parts:
                    continue
                parts.append((-n_orders, f"y_{b}_{m.id}_{cfg.id}"))
                rows.append(f" form_{b}_{m.id}_{cfg.id}: {_terms(parts)} <= 0")

    # Height limit per order and machine.
    for o in instance.orders:
        for m in instance.machines:
            parts = [
                (o.height, xes(o.id, b, m.id, cfg.id))
                for cfg in m.configs
                if o.id in eligible[(m.id, cfg.id)]
                for b in slots
            ]
            if parts:
                rows.append(f" height_{o.id}_{m.id}: {_terms(parts)} <= {m.processing_height}")

    # Area limit per batch.
    for m in instance.machines:
        for b in slots:
            parts = [
                (instance.order(o).area, xes(o, b, m.id, cfg.id))
                for cfg in m.configs
                for o in eligible[(m.id, cfg.id)]
            ]
            if parts:
                rows.append(f" area_{b}_{m.id}: {_terms(parts)} <= {m.processing_area}")

    # Configuration duration: processing plus one setup per formed batch.
    for m in instance.machines:
        for cfg in m.configs:
            parts: list[tuple[int, str]] = [(1, f"cd_{m.id}_{cfg.id}")]
            for o in eligible[(m.id, cfg.id)]:
                opt = cfg.eligible[o]
                for b in slots:
                    parts.append((-opt, xes(o, b, m.id, cfg.id)))
            for b in slots:
                parts.append((-cfg.setup_time, f"y_{b}_{m.id}_{cfg.id}"))
            rows.append(f" dur_{m.id}_{cfg.id}: {_terms(parts)} = 0")

    # Batches only form on utilized configurations.
    for m in instance.machines:
        for cfg in m.configs:
            parts = [(1, f"y_{b}_{m.id}_{cfg.id}") for b in slots]
            parts.append((-instance.batch_slots, f"w_{m.id}_{cfg.id}"))
            rows.append(f" util_{m.id}_{cfg.id}: {_terms(parts)} <= 0")

    # Completion of a utilized configuration from the initial state.
    for m in instance.machines:
        for cfg in m.configs:
            t0 = m.reconfig[(INITIAL_CONFIG, cfg.id)]
            parts = [
                (1, f"cct_{m.id}_{cfg.id}"),
                (-1, f"cd_{m.id}_{cfg.id}"),
                (-big_m, f"w_{m.id}_{cfg.id}"),
            ]
            rows.append(f" start_{m.id}_{cfg.id}: {_terms(parts)} >= {t0 - big_m}")

    # Completion chaining with reconfiguration between utilized configurations.
    for m in instance.machines:
        for cfg in m.configs:
            for cfg2 in m.configs:
                if cfg.id == cfg2.id:
                    continue
                t = m.reconfig[(cfg.id, cfg2.id)]
                parts = [
                    (1, f"cct_{m.id}_{cfg2.id}"),
                    (-1, f"cct_{m.id}_{cfg.id}"),
                    (-1, f"cd_{m.id}_{cfg2.id}"),
                    (-big_m, f"z_{m.id}_{cfg.id}_{cfg2.id}"),
                    (-big_m, f"w_{m.id}_{cfg.id}"),
                    (-big_m, f"w_{m.id}_{cfg2.id}"),
                ]
                rows.append(
                    f" seq_{m.id}_{cfg.id}_{cfg2.id}: {_terms(parts)} >= {t - 3 * big_m}"
                )

    # Two utilized configurations are ordered one way or the other.
    for m in instance.machines:
        cids = m.config_ids()
        for i, c in enumerate(cids):
            for cp in cids[i + 1:]:
                zf = f"z_{m.id}_{c}_{cp}"
                zb = f"z_{m.id}_{cp}_{c}"
                parts = [(1, zf), (1, zb), (-1, f"w_{m.id}_{c}"), (-1, f"w_{m.id}_{cp}")]
                rows.append(f" ord1_{m.id}_{c}_{cp}: {_terms(parts)} >= -1")
                parts = [(1, zf), (1, zb), (1, f"w_{m.id}_{c}"), (1, f"w_{m.id}_{cp}")]
                rows.append(f" ord2_{m.id}_{c}_{cp}: {_terms(parts)} <= 3")

    # Makespan dominates every completion.
    for m in instance.machines:
        for cfg in m.configs:
            parts = [(1, "Cmax"), (-1, f"cct_{m.id}_{cfg.id}")]
            rows.append(f" mk_{m.id}_{cfg.id}: {_terms(parts)} >= 0")

    binaries: list[str] = []
    for o in instance.orders:
        for m in instance.machines:
            for cfg in m.configs:
                if o.id in eligible[(m.id, cfg.id)]:
                    for b in slots:
                        binaries.append(xes(o.id, b, m.id, cfg.id))
    for m in instance.machines:
        for cfg in m.configs:
            for b in slots:
                binaries.append(f"y_{b}_{m.id}_{cfg.id}")
    for m in instance.machines:
        for cfg in m.configs:
            for cfg2 in m.configs:
                if cfg.id != cfg2.id:
                    binaries.append(f"z_{m.id}_{cfg.id}_{cfg2.id}")
    for m in instance.machines:
        for cfg in m.configs:
            binaries.append(f"w_{m.id}_{cfg.id}")

    lines = [
        f"\\ makespan model: {len(instance.orders)} orders,"
        f" {len(instance.machines)} machines, {instance.batch_slots} batch slots,"
        f" bigM {big_m}",
        "Minimize",
        " obj: Cmax",
        "Subject To",
        *rows,
        "Binary",
        *(f" {name}" for name in binaries),
        "End",
    ]
    return "\n".join(lines) + "\n"
