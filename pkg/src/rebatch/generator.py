"""Random instance generation with reproducible seeding.

Distributions (defaults):
  order area        ~ DiscreteUniform(75, 200)
  order height      ~ DiscreteUniform(50, 150), redrawn until it fits the
                      smallest machine height so height never blocks feasibility
  machine area      = ceil(Normal(500, 150)), redrawn until >= 250 so every
                      order fits alone in a batch
  machine height    ~ DiscreteUniform(150, 300)
  base processing   ~ DiscreteUniform(20, 100) per order
  speed coefficient ~ Uniform(0.8, 1.2) per machine-configuration; the
                      processing time of an order on a configuration is
                      round(base * speed), at least 1
  setup time        ~ DiscreteUniform(6, 8)
  batch limit       = 1 with probability 0.1
  eligibility       per order: draw a machine-subset size uniformly from
                      {1..|M|}, pick that many machines, mark each of their
                      configurations eligible with probability 0.75; if
                      nothing resulted, force one random pair
  reconfiguration   ~ DiscreteUniform(15, 30), then repaired to the metric
                      closure so the triangle inequality holds

The PRNG is numpy's PCG64 seeded with ``GenConfig.seed``; the draw order is
fixed (machines, then per-machine configurations, then reconfiguration
matrices, then orders, then eligibility), so equal seeds give byte-identical
instances.

Scaling factors support parameter sweeps: they multiply the reconfiguration,
setup, and machine-area draws, or widen/narrow the spread of the base
processing draw around its mean of 60 (variance scale).  Scaled machine areas
keep the 250 floor so generated instances stay feasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    INITIAL_CONFIG,
    Instance,
    Machine,
    MachineConfig,
    Order,
    OrderKind,
)


@dataclass(frozen=True)
class GenConfig:
    n_orders: int
    n_machines: int
    n_configs_per_machine: int
    seed: int
    remanufacturing_fraction: float = 0.5
    eligibility_prob: float = 0.75
    scale_reconfig: float = 1.0
    scale_setup: float = 1.0
    scale_area: float = 1.0
    scale_opt_variance: float = 1.0

    def validate(self) -> None:
        if min(self.n_orders, self.n_machines, self.n_configs_per_machine) < 1:
            raise ValueError("order/machine/configuration counts must be >= 1")
        if not 0.0 <= self.remanufacturing_fraction <= 1.0:
            raise ValueError("remanufacturing_fraction must lie in [0, 1]")
        if not 0.0 < self.eligibility_prob <= 1.0:
            raise ValueError("eligibility_prob must lie in (0, 1]")
        for name in ("scale_reconfig", "scale_setup", "scale_area", "scale_opt_variance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def label(self) -> str:
        """Instance label in |O|-|C|-|M| form."""
        return f"{self.n_orders}-{self.n_configs_per_machine}-{self.n_machines}"


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def enforce_triangle(matrix: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    """Repair a reconfiguration map to its metric closure.

    Every entry is replaced by the shortest-path value through intermediate
    configurations; no path re-enters the initial configuration because no
    edge targets it.  The result satisfies the triangle inequality and is
    entrywise <= the input.
    """
    nodes = sorted({a for a, _ in matrix} | {b for _, b in matrix})
    dist = {
        (a, b): matrix.get((a, b), math.inf)
        for a in nodes
        for b in nodes
        if a != b
    }
    for k in nodes:
        if k == INITIAL_CONFIG:
            continue  # nothing enters node 0, so it is never intermediate
        for a in nodes:
            if a == k:
                continue
            for b in nodes:
                if b == a or b == k:
                    continue
                via = dist[(a, k)] + dist[(k, b)]
                if via < dist[(a, b)]:
                    dist[(a, b)] = via
    return {key: int(dist[key]) for key in matrix}


def generate(cfg: GenConfig) -> Instance:
    """Generate a random instance; equal seeds give identical instances."""
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    machine_ids = list(range(1, cfg.n_machines + 1))
    config_ids = list(range(1, cfg.n_configs_per_machine + 1))

    # machines: area (resampled), height
    machine_area: dict[int, int] = {}
    machine_height: dict[int, int] = {}
    for mid in machine_ids:
        raw = math.ceil(rng.normal(500.0, 150.0))
        while raw < 250:
            raw = math.ceil(rng.normal(500.0, 150.0))
        machine_area[mid] = max(_round_half_up(raw * cfg.scale_area), 250)
        machine_height[mid] = int(rng.integers(150, 301))
    min_height = min(machine_height.values())

    # per machine-configuration: speed coefficient, setup, batch limit
    speed: dict[tuple[int, int], float] = {}
    setup: dict[tuple[int, int], int] = {}
    limit: dict[tuple[int, int], bool] = {}
    for mid in machine_ids:
        for cid in config_ids:
            speed[(mid, cid)] = float(rng.uniform(0.8, 1.2))
            setup[(mid, cid)] = max(
                _round_half_up(int(rng.integers(6, 9)) * cfg.scale_setup), 0
            )
            limit[(mid, cid)] = bool(rng.random() < 0.1)

    # reconfiguration matrices, repaired to the metric closure
    reconfig: dict[int, dict[tuple[int, int], int]] = {}
    for mid in machine_ids:
        raw_matrix: dict[tuple[int, int], int] = {}
        for a in [INITIAL_CONFIG] + config_ids:
            for b in config_ids:
                if a == b:
                    continue
                draw = int(rng.integers(15, 31))
                raw_matrix[(a, b)] = max(_round_half_up(draw * cfg.scale_reconfig), 0)
        reconfig[mid] = enforce_triangle(raw_matrix)

    # orders: kind, area, height, base processing draw
    orders: list[Order] = []
    base: dict[int, float] = {}
    for oid in range(1, cfg.n_orders + 1):
        kind = (
            OrderKind.REMANUFACTURING
            if rng.random() < cfg.remanufacturing_fraction
            else OrderKind.MANUFACTURING
        )
        area = int(rng.integers(75, 201))
        height = int(rng.integers(50, 151))
        while height > min_height:
            height = int(rng.integers(50, 151))
        draw = float(rng.integers(20, 101))
        if cfg.scale_opt_variance != 1.0:
            draw = 60.0 + (draw - 60.0) * math.sqrt(cfg.scale_opt_variance)
        base[oid] = draw
        orders.append(Order(id=oid, kind=kind, area=area, height=height))

    # eligibility: machine subset, then per-configuration coin flips
    eligible: dict[tuple[int, int], set[int]] = {
        (mid, cid): set() for mid in machine_ids for cid in config_ids
    }
    for oid in range(1, cfg.n_orders + 1):
        subset_size = int(rng.integers(1, cfg.n_machines + 1))
        chosen = rng.choice(cfg.n_machines, size=subset_size, replace=False)
        hit = False
        for mi in sorted(int(i) for i in chosen):
            mid = machine_ids[mi]
            for cid in config_ids:
                if rng.random() < cfg.eligibility_prob:
                    eligible[(mid, cid)].add(oid)
                    hit = True
        if not hit:
            pick = int(rng.integers(0, cfg.n_machines * cfg.n_configs_per_machine))
            mid = machine_ids[pick // cfg.n_configs_per_machine]
            cid = config_ids[pick % cfg.n_configs_per_machine]
            eligible[(mid, cid)].add(oid)

    machines = []
    for mid in machine_ids:
        configs = []
        for cid in config_ids:
            times = {
                oid: max(_round_half_up(base[oid] * speed[(mid, cid)]), 1)
                for oid in sorted(eligible[(mid, cid)])
            }
            configs.append(
                MachineConfig(
                    id=cid,
                    setup_time=setup[(mid, cid)],
                    batch_limit=limit[(mid, cid)],
                    eligible=times,
                )
            )
        machines.append(
            Machine(
                id=mid,
                processing_area=machine_area[mid],
                processing_height=machine_height[mid],
                configs=tuple(configs),
                reconfig=reconfig[mid],
            )
        )

    return Instance(
        orders=tuple(orders),
        machines=tuple(machines),
        batch_slots=cfg.n_orders,
    )
