"""Deterministic discrete-event simulation of the swarm mission loop.

Drones traverse zones, traffic arrives, selection/report/redistribution
epochs fire, batteries drain, detections are sampled, and metrics
accumulate. Identical (scenario, seed) inputs produce identical event
logs and metrics regardless of host or wall clock: all randomness flows
through per-flow hash-derived streams, and every iteration order is
pinned.

Within one tick events dispatch as: zone transition, selection epoch,
report epoch, redistribution epoch, then arrivals and completions. The
logged `seq` is the dispatch index, so (time_s, seq) totally orders the
event log.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .catalog import Catalog, ImplementationProfile, PlatformKind
from .distributor import FlowBatch, distribute_flows, merge_reports, self_assess
from .errors import NoActiveImplementation, NoCapacity, NoImplementationForDrone, SimulationError
from .pareto import offline_select
from .scenario import EnergyParams, ScenarioConfig, Zone, validate_against_catalog
from .selector import select_online


class EventKind(str, Enum):
    ZONE_TRANSITION = "zone_transition"
    SELECTION_EPOCH = "selection_epoch"
    REPORT_EPOCH = "report_epoch"
    REDISTRIBUTION_EPOCH = "redistribution_epoch"
    TRAFFIC_ARRIVAL = "traffic_arrival"
    FLOW_COMPLETED = "flow_completed"
    END = "end"


# Within-tick dispatch order; arrivals and completions follow the epochs.
_RANK = {
    EventKind.ZONE_TRANSITION: 0,
    EventKind.SELECTION_EPOCH: 1,
    EventKind.REPORT_EPOCH: 2,
    EventKind.REDISTRIBUTION_EPOCH: 3,
    EventKind.TRAFFIC_ARRIVAL: 4,
    EventKind.FLOW_COMPLETED: 5,
    EventKind.END: 6,
}


@dataclass(frozen=True)
class Event:
    """One line of the run log."""

    time_s: float
    seq: int
    kind: EventKind
    drone_id: str | None = None
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        record = {"time_s": self.time_s, "seq": self.seq, "kind": self.kind.value}
        if self.drone_id is not None:
            record["drone_id"] = self.drone_id
        record["payload"] = self.payload
        return record


class DetectionOutcome(str, Enum):
    TRUE_POSITIVE = "true_positive"
    FALSE_NEGATIVE = "false_negative"
    TRUE_NEGATIVE = "true_negative"
    FALSE_POSITIVE = "false_positive"


def flow_stream(seed: int, key: str) -> random.Random:
    """Deterministic per-flow random stream, independent of processing order."""
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def sample_detection(
    flow_is_malicious: bool, impl_accuracy: float, rng_stream: random.Random
) -> DetectionOutcome:
    """Classify one flow: correct with probability impl_accuracy."""
    if not 0.0 <= impl_accuracy <= 1.0:
        raise ValueError(f"accuracy must lie in [0, 1], got {impl_accuracy}")
    correct = rng_stream.random() < impl_accuracy
    if flow_is_malicious:
        return DetectionOutcome.TRUE_POSITIVE if correct else DetectionOutcome.FALSE_NEGATIVE
    return DetectionOutcome.TRUE_NEGATIVE if correct else DetectionOutcome.FALSE_POSITIVE


@dataclass
class _Arrival:
    batch: FlowBatch
    arrival_time_s: float
    malicious: tuple[bool, ...]
    zone_id: str


@dataclass
class _Service:
    arrival: _Arrival
    start_s: float
    capacity_fps: float
    profile: ImplementationProfile
    completion_s: float


@dataclass
class DroneState:
    """Mutable per-drone simulation state."""

    drone_id: str
    platform: PlatformKind
    storage_budget_mb: float
    battery_capacity_j: float
    battery_j: float
    cpu_reserved_frac: float
    shortlist: tuple[ImplementationProfile, ...]
    active_impl: str | None = None
    backlog: deque = field(default_factory=deque)
    in_service: _Service | None = None

    def __post_init__(self):
        if self.battery_j > self.battery_capacity_j:
            raise ValueError(
                f"battery_j {self.battery_j} exceeds capacity {self.battery_capacity_j}"
            )
        self._by_id = {p.id: p for p in self.shortlist}
        if self.active_impl is not None and self.active_impl not in self._by_id:
            raise ValueError(
                f"active implementation {self.active_impl!r} is not in the shortlist"
            )

    @property
    def battery_frac(self) -> float:
        return self.battery_j / self.battery_capacity_j

    @property
    def active_profile(self) -> ImplementationProfile | None:
        if self.active_impl is None:
            return None
        return self._by_id[self.active_impl]

    @property
    def queued_flows(self) -> int:
        """Accepted but unfinished flows: queue plus the batch in service."""
        queued = sum(arrival.batch.flow_count for arrival in self.backlog)
        if self.in_service is not None:
            queued += self.in_service.arrival.batch.flow_count
        return queued

    def activate(self, impl_id: str) -> None:
        if impl_id not in self._by_id:
            raise ValueError(f"implementation {impl_id!r} is not in the shortlist")
        self.active_impl = impl_id


def account_energy(
    drone: DroneState,
    dt_s: float,
    flows_processed: Iterable[FlowBatch] = (),
    bytes_tx_rx: int = 0,
    params: EnergyParams = EnergyParams(),
    profile: ImplementationProfile | None = None,
) -> float:
    """Charge the drone's battery and return the joules actually consumed.

    Demand is idle_w * dt_s plus per-flow analysis energy plus
    comm_j_per_mb * bytes / 1e6. Consumption is clipped to the stored
    charge, so the battery floors at zero and a depleted drone consumes
    nothing. `profile` overrides the active implementation for flow
    energy (a batch is billed at the implementation that analyzed it).
    """
    if dt_s < 0:
        raise ValueError(f"dt_s must be >= 0, got {dt_s}")
    demand = params.idle_w * dt_s
    flows_processed = tuple(flows_processed)
    if flows_processed:
        billed = profile if profile is not None else drone.active_profile
        if billed is None:
            raise NoActiveImplementation(
                f"drone {drone.drone_id!r} processed flows with no active implementation"
            )
        for batch in flows_processed:
            demand += batch.flow_count * billed.energy_mj / 1000.0
    demand += params.comm_j_per_mb * bytes_tx_rx / 1e6
    consumed = min(demand, drone.battery_j)
    drone.battery_j -= consumed
    return consumed


@dataclass
class DroneMetrics:
    flows_generated: int = 0
    flows_analyzed: int = 0
    malicious_total: int = 0
    detected: int = 0
    missed: int = 0
    dropped: int = 0
    latency_ms_sum: float = 0.0
    energy_j: float = 0.0
    comm_bytes: int = 0
    impl_switches: int = 0

    @property
    def mean_latency_ms(self) -> float:
        return self.latency_ms_sum / self.flows_analyzed if self.flows_analyzed else 0.0

    def to_dict(self) -> dict:
        return {
            "flows_generated": self.flows_generated,
            "flows_analyzed": self.flows_analyzed,
            "malicious_total": self.malicious_total,
            "detected": self.detected,
            "missed": self.missed,
            "dropped": self.dropped,
            "mean_latency_ms": self.mean_latency_ms,
            "energy_j": self.energy_j,
            "comm_bytes": self.comm_bytes,
            "impl_switches": self.impl_switches,
        }


@dataclass
class SimMetrics:
    """Per-drone counters plus the swarm aggregate."""

    per_drone: dict[str, DroneMetrics]

    @property
    def swarm(self) -> DroneMetrics:
        total = DroneMetrics()
        for metrics in self.per_drone.values():
            total.flows_generated += metrics.flows_generated
            total.flows_analyzed += metrics.flows_analyzed
            total.malicious_total += metrics.malicious_total
            total.detected += metrics.detected
            total.missed += metrics.missed
            total.dropped += metrics.dropped
            total.latency_ms_sum += metrics.latency_ms_sum
            total.energy_j += metrics.energy_j
            total.comm_bytes += metrics.comm_bytes
            total.impl_switches += metrics.impl_switches
        return total

    def to_dict(self) -> dict:
        return {
            "swarm": self.swarm.to_dict(),
            "drones": {drone_id: m.to_dict() for drone_id, m in self.per_drone.items()},
        }


@dataclass
class SimResult:
    scenario_name: str
    seed: int
    duration_s: float
    metrics: SimMetrics
    events: list[Event]
    samples: list[dict]

    def metrics_document(self) -> dict:
        return {
            "schema_version": 1,
            "scenario": self.scenario_name,
            "seed": self.seed,
            "duration_s": self.duration_s,
            **self.metrics.to_dict(),
        }


class Simulation:
    """Single-threaded event loop over one scenario and seed."""

    def __init__(self, config: ScenarioConfig, seed: int, catalog: Catalog):
        validate_against_catalog(config, catalog)
        self.config = config
        self.seed = seed
        self.catalog = catalog
        self.profiles_by_id = catalog.by_id
        self.drones: list[DroneState] = []
        for spec in config.drones:
            shortlist = offline_select(catalog, spec.platform, spec.storage_budget_mb)
            if not shortlist:
                raise NoImplementationForDrone(
                    f"drone {spec.drone_id!r} has an empty shortlist: no "
                    f"{spec.platform.label} implementation fits {spec.storage_budget_mb} MiB"
                )
            self.drones.append(
                DroneState(
                    drone_id=spec.drone_id,
                    platform=spec.platform,
                    storage_budget_mb=spec.storage_budget_mb,
                    battery_capacity_j=spec.battery_capacity_j,
                    battery_j=spec.battery_capacity_j,
                    cpu_reserved_frac=spec.cpu_reserved_frac,
                    shortlist=tuple(shortlist),
                )
            )
        self._by_id = {d.drone_id: d for d in self.drones}
        self.events: list[Event] = []
        self.samples: list[dict] = []
        self.metrics = SimMetrics({d.drone_id: DroneMetrics() for d in self.drones})
        self._heap: list[tuple] = []
        self._push_counter = 0
        self._last_dispatch_s = 0.0
        self._last_idle_charge_s = 0.0
        self._current_zone: Zone | None = None
        self._pending: list[_Arrival] = []
        self._reports: list = []
        self._arrival_acc = {d.drone_id: 0.0 for d in self.drones}
        self._arrival_seq = {d.drone_id: 0 for d in self.drones}
        self._detected_cum = {d.drone_id: 0 for d in self.drones}

    # -- scheduling ---------------------------------------------------

    def _push(self, time_s: float, kind: EventKind, data=None) -> None:
        self._push_counter += 1
        heapq.heappush(self._heap, (time_s, _RANK[kind], self._push_counter, kind, data))

    def _schedule_all(self) -> None:
        duration = self.config.duration_s
        period = self.config.distribution.epoch_period_s
        for zone in self.config.zones:
            self._push(zone.enter_time_s, EventKind.ZONE_TRANSITION, zone)
        epoch_times = []
        k = 0
        while k * period < duration:
            epoch_times.append(k * period)
            k += 1
        for epoch_index, t in enumerate(epoch_times):
            self._push(t, EventKind.REPORT_EPOCH, epoch_index)
            self._push(t, EventKind.REDISTRIBUTION_EPOCH, epoch_index)
        selection_times = set(epoch_times) | {
            z.enter_time_s for z in self.config.zones if z.enter_time_s < duration or duration == 0
        }
        for t in sorted(selection_times):
            self._push(t, EventKind.SELECTION_EPOCH, None)
        tick = self.config.arrival_period_s
        k = 1
        while k * tick < duration:
            self._push(k * tick, EventKind.TRAFFIC_ARRIVAL, None)
            k += 1
        self._push(duration, EventKind.END, None)

    # -- event emission ------------------------------------------------

    def _emit(self, time_s: float, kind: EventKind, drone_id: str | None = None, **payload):
        self.events.append(Event(time_s, len(self.events), kind, drone_id, payload))

    # -- main loop -----------------------------------------------------

    def run(self) -> SimResult:
        self._schedule_all()
        handlers = {
            EventKind.ZONE_TRANSITION: self._on_zone,
            EventKind.SELECTION_EPOCH: self._on_selection,
            EventKind.REPORT_EPOCH: self._on_report,
            EventKind.REDISTRIBUTION_EPOCH: self._on_redistribution,
            EventKind.TRAFFIC_ARRIVAL: self._on_arrival,
            EventKind.FLOW_COMPLETED: self._on_completion,
            EventKind.END: self._on_end,
        }
        while self._heap:
            time_s, _, _, kind, data = heapq.heappop(self._heap)
            if time_s < self._last_dispatch_s:
                raise SimulationError(
                    f"event queue went backwards: {time_s} after {self._last_dispatch_s}"
                )
            self._last_dispatch_s = time_s
            handlers[kind](time_s, data)
            if kind is EventKind.END:
                break
        return SimResult(
            scenario_name=self.config.name,
            seed=self.seed,
            duration_s=self.config.duration_s,
            metrics=self.metrics,
            events=self.events,
            samples=self.samples,
        )

    # -- handlers --------------------------------------------------------

    def _on_zone(self, time_s: float, zone: Zone) -> None:
        self._current_zone = zone
        self._emit(
            time_s,
            EventKind.ZONE_TRANSITION,
            zone_id=zone.zone_id,
            security=zone.security.label,
            attack_prob=zone.attack_prob,
            flow_rate_fps=zone.flow_rate_fps,
        )

    def _on_selection(self, time_s: float, _data) -> None:
        constraints = self.config.security_profiles[self._current_zone.security]
        for drone in self.drones:
            decision = select_online(drone.shortlist, constraints, current=drone.active_impl)
            switched = drone.active_impl is not None and decision.chosen != drone.active_impl
            if switched:
                self.metrics.per_drone[drone.drone_id].impl_switches += 1
            drone.activate(decision.chosen)
            self._emit(
                time_s,
                EventKind.SELECTION_EPOCH,
                drone_id=drone.drone_id,
                chosen=decision.chosen,
                rationale=decision.rationale.value,
                feasible_count=decision.feasible_count,
                switched=switched,
            )

    def _on_report(self, time_s: float, epoch_index: int) -> None:
        params = self.config.energy
        n = len(self.drones)
        dt = time_s - self._last_idle_charge_s
        self._last_idle_charge_s = time_s
        for drone in self.drones:
            broadcast_bytes = params.report_bytes * (n - 1) if drone.battery_j > 0 else 0
            consumed = account_energy(drone, dt, (), broadcast_bytes, params)
            metrics = self.metrics.per_drone[drone.drone_id]
            metrics.energy_j += consumed
            metrics.comm_bytes += broadcast_bytes
            report = self_assess(drone, epoch_index)
            self._reports.append(report)
            self._emit(
                time_s,
                EventKind.REPORT_EPOCH,
                drone_id=drone.drone_id,
                epoch=epoch_index,
                energy_j=consumed,
                comm_bytes=broadcast_bytes,
                report=report.to_dict(),
            )
            self.samples.append(
                {
                    "time_s": time_s,
                    "drone_id": drone.drone_id,
                    "battery_j": drone.battery_j,
                    "queued_flows": drone.queued_flows,
                    "detected_cum": self._detected_cum[drone.drone_id],
                }
            )

    def _on_redistribution(self, time_s: float, epoch_index: int) -> None:
        view = merge_reports(
            self._reports, epoch_index, self.config.distribution.staleness_epochs
        )
        if not self._pending:
            self._emit(
                time_s,
                EventKind.REDISTRIBUTION_EPOCH,
                epoch=epoch_index,
                assignments={},
                pending=0,
            )
            return
        flows = [arrival.batch for arrival in self._pending]
        try:
            plan = distribute_flows(
                view, flows, self.config.distribution, self.profiles_by_id, epoch=epoch_index
            )
        except NoCapacity:
            self._emit(
                time_s,
                EventKind.REDISTRIBUTION_EPOCH,
                epoch=epoch_index,
                no_capacity=True,
                pending=len(self._pending),
            )
            return
        self._emit(
            time_s,
            EventKind.REDISTRIBUTION_EPOCH,
            epoch=epoch_index,
            assignments=dict(plan.assignments),
            pending=len(self._pending),
            predicted_cost=plan.predicted_cost.to_dict(),
        )
        transfers: dict[str, int] = {}
        for arrival in self._pending:
            target_id = plan.assignments[arrival.batch.flow_id]
            if target_id != arrival.batch.origin_drone:
                origin = arrival.batch.origin_drone
                transfers[origin] = transfers.get(origin, 0) + arrival.batch.size_bytes
            self._by_id[target_id].backlog.append(arrival)
        self._pending = []
        params = self.config.energy
        for drone in self.drones:
            sent = transfers.get(drone.drone_id, 0)
            if sent == 0:
                continue
            consumed = account_energy(drone, 0.0, (), sent, params)
            metrics = self.metrics.per_drone[drone.drone_id]
            metrics.energy_j += consumed
            metrics.comm_bytes += sent
            self._emit(
                time_s,
                EventKind.REDISTRIBUTION_EPOCH,
                drone_id=drone.drone_id,
                epoch=epoch_index,
                energy_j=consumed,
                comm_bytes=sent,
            )
        for drone in self.drones:
            self._maybe_start_service(drone, time_s)

    def _on_arrival(self, time_s: float, _data) -> None:
        zone = self._current_zone
        tick = self.config.arrival_period_s
        for drone in self.drones:
            acc = self._arrival_acc[drone.drone_id] + zone.flow_rate_fps * tick
            count = int(acc)
            self._arrival_acc[drone.drone_id] = acc - count
            if count == 0:
                continue
            index = self._arrival_seq[drone.drone_id]
            self._arrival_seq[drone.drone_id] = index + 1
            flow_id = f"{drone.drone_id}-{index:05d}"
            malicious = tuple(
                flow_stream(self.seed, f"{flow_id}#{i}:malicious").random() < zone.attack_prob
                for i in range(count)
            )
            batch = FlowBatch(
                flow_id=flow_id,
                origin_drone=drone.drone_id,
                size_bytes=count * zone.mean_flow_bytes,
                flow_count=count,
            )
            self._pending.append(_Arrival(batch, time_s, malicious, zone.zone_id))
            metrics = self.metrics.per_drone[drone.drone_id]
            metrics.flows_generated += count
            metrics.malicious_total += sum(malicious)
            self._emit(
                time_s,
                EventKind.TRAFFIC_ARRIVAL,
                drone_id=drone.drone_id,
                flow_id=flow_id,
                flow_count=count,
                size_bytes=batch.size_bytes,
                malicious_count=sum(malicious),
            )

    def _maybe_start_service(self, drone: DroneState, time_s: float) -> None:
        if drone.in_service is not None or not drone.backlog:
            return
        if drone.active_impl is None or drone.battery_j <= 0:
            return
        capacity = self_assess(drone, 0).capacity_fps
        if capacity <= 0:
            return
        arrival = drone.backlog.popleft()
        completion = time_s + arrival.batch.flow_count / capacity
        drone.in_service = _Service(
            arrival, time_s, capacity, drone.active_profile, completion
        )
        self._push(completion, EventKind.FLOW_COMPLETED, drone.drone_id)

    def _on_completion(self, time_s: float, drone_id: str) -> None:
        drone = self._by_id[drone_id]
        service = drone.in_service
        if service is None or service.completion_s != time_s:
            raise SimulationError(f"stray completion for drone {drone_id!r} at {time_s}")
        drone.in_service = None
        arrival = service.arrival
        count = arrival.batch.flow_count
        wait_s = service.start_s - arrival.arrival_time_s
        mean_latency_ms = (wait_s + (count + 1) / (2.0 * service.capacity_fps)) * 1000.0
        detected = 0
        missed = 0
        for i, is_malicious in enumerate(arrival.malicious):
            stream = flow_stream(self.seed, f"{arrival.batch.flow_id}#{i}:verdict")
            outcome = sample_detection(is_malicious, service.profile.accuracy, stream)
            if outcome is DetectionOutcome.TRUE_POSITIVE:
                detected += 1
            elif outcome is DetectionOutcome.FALSE_NEGATIVE:
                missed += 1
        consumed = account_energy(
            drone, 0.0, (arrival.batch,), 0, self.config.energy, profile=service.profile
        )
        metrics = self.metrics.per_drone[drone_id]
        metrics.flows_analyzed += count
        metrics.latency_ms_sum += count * mean_latency_ms
        metrics.detected += detected
        metrics.missed += missed
        metrics.energy_j += consumed
        self._detected_cum[drone_id] += detected
        self._emit(
            time_s,
            EventKind.FLOW_COMPLETED,
            drone_id=drone_id,
            flow_id=arrival.batch.flow_id,
            flow_count=count,
            mean_latency_ms=mean_latency_ms,
            detected=detected,
            missed=missed,
            energy_j=consumed,
            impl=service.profile.id,
        )
        self._maybe_start_service(drone, time_s)

    def _on_end(self, time_s: float, _data) -> None:
        params = self.config.energy
        dt = time_s - self._last_idle_charge_s
        self._last_idle_charge_s = time_s
        pending_by_origin: dict[str, int] = {}
        for arrival in self._pending:
            origin = arrival.batch.origin_drone
            pending_by_origin[origin] = (
                pending_by_origin.get(origin, 0) + arrival.batch.flow_count
            )
        for drone in self.drones:
            consumed = account_energy(drone, dt, (), 0, params)
            metrics = self.metrics.per_drone[drone.drone_id]
            metrics.energy_j += consumed
            dropped = drone.queued_flows + pending_by_origin.get(drone.drone_id, 0)
            metrics.dropped += dropped
            self._emit(
                time_s,
                EventKind.END,
                drone_id=drone.drone_id,
                energy_j=consumed,
                dropped=dropped,
                battery_j=drone.battery_j,
            )
            self.samples.append(
                {
                    "time_s": time_s,
                    "drone_id": drone.drone_id,
                    "battery_j": drone.battery_j,
                    "queued_flows": drone.queued_flows,
                    "detected_cum": self._detected_cum[drone.drone_id],
                }
            )
        self._pending = []
        self._emit(time_s, EventKind.END, duration_s=self.config.duration_s)


def run(config: ScenarioConfig, seed: int, catalog: Catalog | None = None) -> SimResult:
    """Run one scenario to completion; pure in (config, seed, catalog)."""
    if catalog is None:
        catalog = config.catalog.load(Path("."))
    return Simulation(config, seed, catalog).run()
