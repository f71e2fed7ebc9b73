"""Swarm traffic distribution: capacity self-assessment, report merging,
and flow-to-drone assignment.

Planning is pure: broadcast reports are value objects, and any node that
holds the same merged view computes the same plan, so no coordinator is
needed. The greedy list scheduler is the production path; the exhaustive
enumerator exists to bound its optimality gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .catalog import ImplementationProfile
from .errors import ConfigError, InstanceTooLarge, NoActiveImplementation, NoCapacity

if TYPE_CHECKING:
    from .simulator import DroneState

BATTERY_DERATING_KNEE = 0.2
BRUTE_FORCE_GUARD = 1_000_000


@dataclass(frozen=True)
class CapacityReport:
    """One drone's broadcast self-assessment for an epoch."""

    drone_id: str
    epoch: int
    capacity_fps: float
    backlog_flows: int
    battery_frac: float
    active_impl: str | None

    def __post_init__(self):
        if self.epoch < 0:
            raise ValueError(f"epoch must be >= 0, got {self.epoch}")
        if self.capacity_fps < 0 or not math.isfinite(self.capacity_fps):
            raise ValueError(f"capacity_fps must be finite and >= 0, got {self.capacity_fps}")
        if self.backlog_flows < 0:
            raise ValueError(f"backlog_flows must be >= 0, got {self.backlog_flows}")
        if not 0.0 <= self.battery_frac <= 1.0:
            raise ValueError(f"battery_frac must lie in [0, 1], got {self.battery_frac}")
        if (self.battery_frac == 0.0 or self.active_impl is None) and self.capacity_fps != 0.0:
            raise ValueError(
                "capacity_fps must be 0 for a dead drone or one with no active implementation"
            )

    def to_dict(self) -> dict:
        return {
            "drone_id": self.drone_id,
            "epoch": self.epoch,
            "capacity_fps": self.capacity_fps,
            "backlog_flows": self.backlog_flows,
            "battery_frac": self.battery_frac,
            "active_impl": self.active_impl,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CapacityReport":
        return cls(
            drone_id=data["drone_id"],
            epoch=int(data["epoch"]),
            capacity_fps=float(data["capacity_fps"]),
            backlog_flows=int(data["backlog_flows"]),
            battery_frac=float(data["battery_frac"]),
            active_impl=data.get("active_impl"),
        )


@dataclass(frozen=True)
class FlowBatch:
    """Aggregated unit of traffic to be analyzed by exactly one drone."""

    flow_id: str
    origin_drone: str
    size_bytes: int
    flow_count: int

    def __post_init__(self):
        if self.flow_count < 1:
            raise ValueError(f"flow_count must be >= 1, got {self.flow_count}")
        if self.size_bytes < self.flow_count:
            raise ValueError(
                f"size_bytes must be >= flow_count ({self.flow_count}), got {self.size_bytes}"
            )

    def to_dict(self) -> dict:
        return {
            "flow_id": self.flow_id,
            "origin_drone": self.origin_drone,
            "size_bytes": self.size_bytes,
            "flow_count": self.flow_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FlowBatch":
        return cls(
            flow_id=data["flow_id"],
            origin_drone=data["origin_drone"],
            size_bytes=int(data["size_bytes"]),
            flow_count=int(data["flow_count"]),
        )


@dataclass(frozen=True)
class DistributionParams:
    """Cost weights and epoch cadence for flow distribution.

    The scalar cost blends makespan in seconds (alpha), energy in joules
    (beta), and communication in megabytes (gamma).
    """

    alpha: float = 1.0
    beta: float = 0.5
    gamma: float = 0.5
    epoch_period_s: float = 5.0
    staleness_epochs: int = 2

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.epoch_period_s <= 0:
            raise ConfigError(f"epoch_period_s must be > 0, got {self.epoch_period_s}")
        if self.staleness_epochs < 0:
            raise ConfigError(f"staleness_epochs must be >= 0, got {self.staleness_epochs}")

    def scalar(self, makespan_s: float, energy_mj: float, comm_bytes: int) -> float:
        return (
            self.alpha * makespan_s
            + self.beta * (energy_mj / 1e3)
            + self.gamma * (comm_bytes / 1e6)
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Predicted plan cost: components plus their weighted scalar."""

    makespan_s: float
    energy_mj: float
    comm_bytes: int
    scalar: float

    def to_dict(self) -> dict:
        return {
            "makespan_s": self.makespan_s,
            "energy_mj": self.energy_mj,
            "comm_bytes": self.comm_bytes,
            "scalar": self.scalar,
        }


@dataclass(frozen=True)
class AssignmentPlan:
    """Flow-to-drone mapping for one epoch."""

    assignments: Mapping[str, str]
    epoch: int
    predicted_cost: CostBreakdown

    def to_dict(self) -> dict:
        return {
            "assignments": dict(self.assignments),
            "epoch": self.epoch,
            "predicted_cost": self.predicted_cost.to_dict(),
        }


def self_assess(drone: "DroneState", epoch: int) -> CapacityReport:
    """Estimate sustainable throughput and workload for broadcast.

    capacity_fps = (1000 / latency_ms) * (1 - cpu_reserved_frac) * derating,
    where derating is 1 above 20% battery and falls linearly to 0 below it.
    """
    profile = drone.active_profile
    if profile is None:
        raise NoActiveImplementation(f"drone {drone.drone_id!r} has no active implementation")
    battery_frac = drone.battery_frac
    derating = (
        1.0 if battery_frac >= BATTERY_DERATING_KNEE else battery_frac / BATTERY_DERATING_KNEE
    )
    capacity = (1000.0 / profile.latency_ms) * (1.0 - drone.cpu_reserved_frac) * derating
    return CapacityReport(
        drone_id=drone.drone_id,
        epoch=epoch,
        capacity_fps=capacity,
        backlog_flows=drone.queued_flows,
        battery_frac=battery_frac,
        active_impl=profile.id,
    )


def merge_reports(
    reports: Iterable[CapacityReport], epoch: int, staleness_epochs: int = 2
) -> dict[str, CapacityReport]:
    """Freshest report per drone, excluding future and stale ones.

    Keeps, per drone, the report with the highest epoch <= the current
    epoch (the last one seen wins an equal-epoch tie); drones whose
    freshest report is older than staleness_epochs drop out. Returned dict
    is keyed and ordered by drone id.
    """
    freshest: dict[str, CapacityReport] = {}
    for report in reports:
        if report.epoch > epoch:
            continue
        held = freshest.get(report.drone_id)
        if held is None or report.epoch >= held.epoch:
            freshest[report.drone_id] = report
    return {
        drone_id: freshest[drone_id]
        for drone_id in sorted(freshest)
        if epoch - freshest[drone_id].epoch <= staleness_epochs
    }


def _energy_mj_per_flow(
    report: CapacityReport, profiles_by_id: Mapping[str, ImplementationProfile]
) -> float:
    if report.active_impl not in profiles_by_id:
        raise ConfigError(
            f"report from {report.drone_id!r} names unknown implementation "
            f"{report.active_impl!r}"
        )
    return profiles_by_id[report.active_impl].energy_mj


def _plan_epoch(view: Mapping[str, CapacityReport], epoch: int | None) -> int:
    if epoch is not None:
        return epoch
    return max((r.epoch for r in view.values()), default=0)


def _empty_plan(params: DistributionParams, epoch: int) -> AssignmentPlan:
    cost = CostBreakdown(0.0, 0.0, 0, params.scalar(0.0, 0.0, 0))
    return AssignmentPlan({}, epoch, cost)


def _check_flows(flows: Sequence[FlowBatch]) -> None:
    seen: set[str] = set()
    for flow in flows:
        if flow.flow_id in seen:
            raise ValueError(f"duplicate flow_id {flow.flow_id!r}")
        seen.add(flow.flow_id)


def distribute_flows(
    view: Mapping[str, CapacityReport],
    flows: Sequence[FlowBatch],
    params: DistributionParams,
    profiles_by_id: Mapping[str, ImplementationProfile],
    epoch: int | None = None,
) -> AssignmentPlan:
    """Greedy list scheduling of flow batches onto reporting drones.

    Flows are taken largest-first (stable on input order) and each goes to
    the drone with the least marginal scalar cost: the makespan term is
    (assigned flows + backlog) / capacity, the energy term charges the
    target implementation's per-flow energy, and the communication term
    charges size_bytes whenever the target is not the origin. Drones
    reporting zero capacity receive nothing. Ties break on drone id, so
    identical inputs yield identical plans.
    """
    _check_flows(flows)
    epoch = _plan_epoch(view, epoch)
    targets = [view[drone_id] for drone_id in sorted(view) if view[drone_id].capacity_fps > 0]
    if not targets:
        if flows:
            raise NoCapacity("flows are pending but no reporting drone has capacity")
        return _empty_plan(params, epoch)
    energy_per_flow = {r.drone_id: _energy_mj_per_flow(r, profiles_by_id) for r in targets}
    loads = {r.drone_id: float(r.backlog_flows) for r in targets}
    caps = {r.drone_id: r.capacity_fps for r in targets}
    assignments: dict[str, str] = {}
    energy_mj = 0.0
    comm_bytes = 0
    order = sorted(range(len(flows)), key=lambda i: -flows[i].flow_count)
    for index in order:
        flow = flows[index]
        best_id = None
        best_scalar = math.inf
        for report in targets:
            drone_id = report.drone_id
            makespan = max(
                (loads[d] + (flow.flow_count if d == drone_id else 0)) / caps[d]
                for d in loads
            )
            trial_energy = energy_mj + flow.flow_count * energy_per_flow[drone_id]
            trial_comm = comm_bytes + (flow.size_bytes if flow.origin_drone != drone_id else 0)
            trial = params.scalar(makespan, trial_energy, trial_comm)
            if trial < best_scalar:
                best_id = drone_id
                best_scalar = trial
        assignments[flow.flow_id] = best_id
        loads[best_id] += flow.flow_count
        energy_mj += flow.flow_count * energy_per_flow[best_id]
        comm_bytes += flow.size_bytes if flow.origin_drone != best_id else 0
    makespan = max(loads[d] / caps[d] for d in loads)
    ordered = {flow.flow_id: assignments[flow.flow_id] for flow in flows}
    cost = CostBreakdown(makespan, energy_mj, comm_bytes, params.scalar(makespan, energy_mj, comm_bytes))
    return AssignmentPlan(ordered, epoch, cost)


def brute_force_distribute(
    view: Mapping[str, CapacityReport],
    flows: Sequence[FlowBatch],
    params: DistributionParams,
    profiles_by_id: Mapping[str, ImplementationProfile],
    epoch: int | None = None,
) -> AssignmentPlan:
    """Exact minimum-cost assignment by exhaustive enumeration.

    Test oracle for distribute_flows; refuses instances with more than
    BRUTE_FORCE_GUARD candidate assignments. Ties break by lexicographic
    assignment vector (flows in input order, drones sorted by id).
    """
    _check_flows(flows)
    epoch = _plan_epoch(view, epoch)
    targets = [view[drone_id] for drone_id in sorted(view) if view[drone_id].capacity_fps > 0]
    if not targets:
        if flows:
            raise NoCapacity("flows are pending but no reporting drone has capacity")
        return _empty_plan(params, epoch)
    n = len(flows)
    m = len(targets)
    if m**n > BRUTE_FORCE_GUARD:
        raise InstanceTooLarge(f"{m}^{n} assignments exceed the {BRUTE_FORCE_GUARD} guard")
    backlogs = np.array([r.backlog_flows for r in targets], dtype=float)
    caps = np.array([r.capacity_fps for r in targets], dtype=float)
    if n == 0:
        makespan = float(np.max(backlogs / caps))
        cost = CostBreakdown(makespan, 0.0, 0, params.scalar(makespan, 0.0, 0))
        return AssignmentPlan({}, epoch, cost)
    energy_per_flow = np.array(
        [_energy_mj_per_flow(r, profiles_by_id) for r in targets], dtype=float
    )
    index_of = {r.drone_id: i for i, r in enumerate(targets)}
    count = m**n
    candidates = np.arange(count)
    rows = candidates
    loads = np.repeat(backlogs[None, :], count, axis=0)
    energy = np.zeros(count)
    comm = np.zeros(count)
    for position, flow in enumerate(flows):
        # Flow 0 is the most significant digit, so candidate order is the
        # lexicographic assignment-vector order and argmin's first-minimum
        # rule implements the documented tie-break.
        digit = (candidates // (m ** (n - 1 - position))) % m
        loads[rows, digit] += flow.flow_count
        energy += flow.flow_count * energy_per_flow[digit]
        origin = index_of.get(flow.origin_drone, -1)
        comm += np.where(digit == origin, 0, flow.size_bytes)
    makespans = (loads / caps[None, :]).max(axis=1)
    scalars = params.alpha * makespans + params.beta * (energy / 1e3) + params.gamma * (comm / 1e6)
    best = int(np.argmin(scalars))
    assignments = {}
    for position, flow in enumerate(flows):
        digit = (best // (m ** (n - 1 - position))) % m
        assignments[flow.flow_id] = targets[digit].drone_id
    makespan = float(makespans[best])
    energy_mj = float(energy[best])
    comm_bytes = int(comm[best])
    cost = CostBreakdown(
        makespan, energy_mj, comm_bytes, params.scalar(makespan, energy_mj, comm_bytes)
    )
    return AssignmentPlan(assignments, epoch, cost)
