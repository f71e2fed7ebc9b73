"""Shared factories and independent oracles for the test suite.

Oracles here deliberately re-derive results with straightforward code
(explicit loops, numpy all-pairs matrices, itertools enumeration) so they
stay independent of the library's production paths.
"""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from idswarm import (
    CapacityReport,
    Catalog,
    DistributionParams,
    DroneSpec,
    EnergyParams,
    FlowBatch,
    ImplementationProfile,
    MissionConstraints,
    ModelFamily,
    PlatformKind,
    ScenarioConfig,
    SecurityLevel,
    Zone,
)
from idswarm.scenario import CatalogSource
from idswarm.selector import DEFAULT_SECURITY_PROFILES


def make_profile(
    pid: str,
    accuracy: float = 0.9,
    latency_ms: float = 10.0,
    energy_mj: float = 50.0,
    memory_mb: float = 100.0,
    storage_mb: float = 20.0,
    platform: PlatformKind = PlatformKind.CPU_SBC,
    family: ModelFamily = ModelFamily("dnn"),
) -> ImplementationProfile:
    return ImplementationProfile(
        id=pid,
        model_family=family,
        platform=platform,
        accuracy=accuracy,
        latency_ms=latency_ms,
        energy_mj=energy_mj,
        memory_mb=memory_mb,
        storage_mb=storage_mb,
    )


def random_profiles(rng: random.Random, count: int, prefix: str = "p") -> list[ImplementationProfile]:
    return [
        make_profile(
            f"{prefix}{i:03d}",
            accuracy=rng.random(),
            latency_ms=rng.uniform(1.0, 100.0),
            energy_mj=rng.uniform(1.0, 500.0),
            memory_mb=rng.uniform(10.0, 1000.0),
            storage_mb=rng.uniform(1.0, 500.0),
        )
        for i in range(count)
    ]


def rand_constraints(rng: random.Random) -> MissionConstraints:
    raw = [rng.random() for _ in range(4)]
    total = sum(raw)
    weights = tuple(w / total for w in raw)
    weights = (weights[0], weights[1], weights[2], 1.0 - sum(weights[:3]))
    return MissionConstraints(
        min_accuracy=rng.choice([0.0, rng.uniform(0.2, 0.95)]),
        max_latency_ms=rng.choice([math.inf, rng.uniform(5.0, 120.0)]),
        max_energy_mj_per_flow=rng.choice([math.inf, rng.uniform(10.0, 600.0)]),
        max_memory_mb=rng.choice([math.inf, rng.uniform(50.0, 1200.0)]),
        weights=weights,
    )


def oracle_front_ids(profiles) -> set[str]:
    """All-pairs dominance via a numpy matrix; independent of pareto_front."""
    if not profiles:
        return set()
    mat = np.array([[-p.accuracy, p.latency_ms, p.energy_mj, p.memory_mb] for p in profiles])
    le = (mat[:, None, :] <= mat[None, :, :]).all(axis=2)
    lt = (mat[:, None, :] < mat[None, :, :]).any(axis=2)
    dominated = (le & lt).any(axis=0)
    return {p.id for p, is_dom in zip(profiles, dominated) if not is_dom}


def oracle_feasible(profiles, c: MissionConstraints):
    out = []
    for p in profiles:
        if (
            p.accuracy >= c.min_accuracy
            and p.latency_ms <= c.max_latency_ms
            and p.energy_mj <= c.max_energy_mj_per_flow
            and p.memory_mb <= c.max_memory_mb
        ):
            out.append(p)
    return out


def oracle_scores(profiles, weights):
    """Exhaustive min-max scoring with explicit loops."""
    axes = [
        [-p.accuracy for p in profiles],
        [p.latency_ms for p in profiles],
        [p.energy_mj for p in profiles],
        [p.memory_mb for p in profiles],
    ]
    spans = [(min(vals), max(vals)) for vals in axes]
    scores = {}
    for i, p in enumerate(profiles):
        total = 0.0
        for axis in range(4):
            lo, hi = spans[axis]
            norm = 0.0 if hi == lo else (axes[axis][i] - lo) / (hi - lo)
            total += weights[axis] * norm
        scores[p.id] = total
    return scores


def oracle_select(profiles, c: MissionConstraints) -> str:
    """Recompute select_online's winner from scratch with the documented tie-break."""
    feasible = oracle_feasible(profiles, c)
    pool = feasible if feasible else list(profiles)
    scores = oracle_scores(pool, c.weights)
    if feasible:
        ranked = sorted(pool, key=lambda p: (scores[p.id], -p.accuracy, p.energy_mj, p.id))
        return ranked[0].id
    violations = {}
    for p in profiles:
        count = 0
        count += p.accuracy < c.min_accuracy
        count += p.latency_ms > c.max_latency_ms
        count += p.energy_mj > c.max_energy_mj_per_flow
        count += p.memory_mb > c.max_memory_mb
        violations[p.id] = count
    ranked = sorted(
        profiles, key=lambda p: (violations[p.id], scores[p.id], -p.accuracy, p.energy_mj, p.id)
    )
    return ranked[0].id


def oracle_plan_cost(view, flows, params, profiles_by_id, assignment) -> float:
    """Recompute a plan's scalar cost from the cost model definition."""
    drones = sorted(d for d in view if view[d].capacity_fps > 0)
    loads = {d: float(view[d].backlog_flows) for d in drones}
    energy_mj = 0.0
    comm_bytes = 0
    for flow in flows:
        target = assignment[flow.flow_id]
        loads[target] += flow.flow_count
        energy_mj += flow.flow_count * profiles_by_id[view[target].active_impl].energy_mj
        if target != flow.origin_drone:
            comm_bytes += flow.size_bytes
    makespan = max(loads[d] / view[d].capacity_fps for d in drones)
    return params.alpha * makespan + params.beta * energy_mj / 1e3 + params.gamma * comm_bytes / 1e6


def enumerate_costs(view, flows, params, profiles_by_id):
    """Yield (assignment dict, cost) for every possible assignment."""
    drones = sorted(d for d in view if view[d].capacity_fps > 0)
    for combo in itertools.product(drones, repeat=len(flows)):
        assignment = {flow.flow_id: drone for flow, drone in zip(flows, combo)}
        yield assignment, oracle_plan_cost(view, flows, params, profiles_by_id, assignment)


def single_impl_catalog(
    accuracy: float = 0.9, latency_ms: float = 10.0, energy_mj: float = 50.0
) -> Catalog:
    """One implementation per platform, so every selection is forced."""
    return Catalog(
        tuple(
            make_profile(
                f"{kind.label}-only",
                accuracy=accuracy,
                latency_ms=latency_ms,
                energy_mj=energy_mj,
                platform=kind,
            )
            for kind in PlatformKind
        )
    )


def build_scenario(
    n_drones: int = 1,
    flow_rate_fps: float = 1.0,
    attack_prob: float = 0.0,
    duration_s: float = 60.0,
    battery_capacity_j: float = 100000.0,
    cpu_reserved_frac: float = 0.0,
    epoch_period_s: float = 5.0,
    idle_w: float = 2.0,
    comm_j_per_mb: float = 0.5,
    report_bytes: int = 256,
    mean_flow_bytes: int = 500,
    zones: tuple[Zone, ...] | None = None,
    security_profiles=None,
    name: str = "test-scenario",
) -> ScenarioConfig:
    if zones is None:
        zones = (
            Zone(
                zone_id="z1",
                enter_time_s=0.0,
                security=SecurityLevel.LOW,
                attack_prob=attack_prob,
                flow_rate_fps=flow_rate_fps,
                mean_flow_bytes=mean_flow_bytes,
            ),
        )
    return ScenarioConfig(
        name=name,
        catalog=CatalogSource(synth_seed=0, synth_n_per_platform=1),
        drones=tuple(
            DroneSpec(
                drone_id=f"d{i + 1}",
                platform=PlatformKind.CPU_SBC,
                storage_budget_mb=100.0,
                battery_capacity_j=battery_capacity_j,
                cpu_reserved_frac=cpu_reserved_frac,
            )
            for i in range(n_drones)
        ),
        zones=zones,
        security_profiles=security_profiles or dict(DEFAULT_SECURITY_PROFILES),
        distribution=DistributionParams(epoch_period_s=epoch_period_s),
        energy=EnergyParams(
            idle_w=idle_w, comm_j_per_mb=comm_j_per_mb, report_bytes=report_bytes
        ),
        duration_s=duration_s,
    )


def random_distribution_instance(rng: random.Random, max_drones: int = 4, max_flows: int = 8):
    m = rng.randint(1, max_drones)
    n = rng.randint(1, max_flows)
    profiles = {}
    view = {}
    for i in range(m):
        pid = f"impl-{i}"
        profiles[pid] = make_profile(
            pid, latency_ms=rng.uniform(2.0, 50.0), energy_mj=rng.uniform(5.0, 400.0)
        )
        drone_id = f"d{i}"
        view[drone_id] = CapacityReport(
            drone_id=drone_id,
            epoch=3,
            capacity_fps=rng.uniform(5.0, 120.0),
            backlog_flows=rng.randint(0, 20),
            battery_frac=rng.uniform(0.25, 1.0),
            active_impl=pid,
        )
    flows = [
        FlowBatch(
            flow_id=f"f{j}",
            origin_drone=f"d{rng.randrange(m)}",
            size_bytes=rng.randint(200, 20000),
            flow_count=rng.randint(1, 12),
        )
        for j in range(n)
    ]
    params = DistributionParams(
        alpha=rng.uniform(0.2, 2.0), beta=rng.uniform(0.1, 1.0), gamma=rng.uniform(0.1, 1.0)
    )
    return view, flows, params, profiles
