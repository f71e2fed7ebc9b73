"""Scenario files: the single JSON document driving a simulation run.

Schema (schema_version 1):

    {
      "schema_version": 1,
      "name": "patrol-default",
      "catalog": {"path": "catalog.csv"} | {"synth": {"seed": 7, "n_per_platform": 12}},
      "drones": [
        {"drone_id": "d1", "platform": "rpi4b", "storage_budget_mb": 200.0,
         "battery_capacity_j": 5000.0, "cpu_reserved_frac": 0.3}, ...
      ],
      "zones": [
        {"zone_id": "z1", "enter_time_s": 0.0, "security": "low",
         "attack_prob": 0.05, "flow_rate_fps": 2.0, "mean_flow_bytes": 600}, ...
      ],
      "security_profiles": {  # optional, partial overrides of the defaults
        "high": {"min_accuracy": 0.95, "max_latency_ms": 50.0,
                 "max_energy_mj_per_flow": null, "max_memory_mb": null,
                 "weights": [0.6, 0.2, 0.1, 0.1]}
      },
      "distribution_params": {"alpha": 1.0, "beta": 0.5, "gamma": 0.5,
                              "epoch_period_s": 5.0, "staleness_epochs": 2},
      "energy_params": {"idle_w": 2.0, "comm_j_per_mb": 0.5, "report_bytes": 256},
      "duration_s": 300.0,
      "arrival_period_s": 1.0
    }

Unknown keys are rejected. Omitted limit fields (or null) mean unbounded.
The first zone must start at t=0; later zones must start before
duration_s, strictly increasing. Unspecified sections take the documented
defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .catalog import Catalog, PlatformKind, SynthParams, load_catalog, synth_catalog
from .distributor import DistributionParams
from .errors import ConfigError
from .selector import DEFAULT_SECURITY_PROFILES, MissionConstraints, SecurityLevel

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class DroneSpec:
    drone_id: str
    platform: PlatformKind
    storage_budget_mb: float
    battery_capacity_j: float
    cpu_reserved_frac: float

    def __post_init__(self):
        if not self.drone_id:
            raise ConfigError("drone_id must be non-empty")
        if self.storage_budget_mb <= 0:
            raise ConfigError(f"storage_budget_mb must be > 0, got {self.storage_budget_mb}")
        if self.battery_capacity_j <= 0:
            raise ConfigError(f"battery_capacity_j must be > 0, got {self.battery_capacity_j}")
        if not 0.0 <= self.cpu_reserved_frac <= 1.0:
            raise ConfigError(
                f"cpu_reserved_frac must lie in [0, 1], got {self.cpu_reserved_frac}"
            )


@dataclass(frozen=True)
class Zone:
    """Timeline segment with its own security level and traffic profile."""

    zone_id: str
    enter_time_s: float
    security: SecurityLevel
    attack_prob: float
    flow_rate_fps: float
    mean_flow_bytes: int

    def __post_init__(self):
        if not self.zone_id:
            raise ConfigError("zone_id must be non-empty")
        if self.enter_time_s < 0:
            raise ConfigError(f"enter_time_s must be >= 0, got {self.enter_time_s}")
        if not 0.0 <= self.attack_prob <= 1.0:
            raise ConfigError(f"attack_prob must lie in [0, 1], got {self.attack_prob}")
        if self.flow_rate_fps < 0:
            raise ConfigError(f"flow_rate_fps must be >= 0, got {self.flow_rate_fps}")
        if self.mean_flow_bytes < 1:
            raise ConfigError(f"mean_flow_bytes must be >= 1, got {self.mean_flow_bytes}")


@dataclass(frozen=True)
class EnergyParams:
    idle_w: float = 2.0
    comm_j_per_mb: float = 0.5
    report_bytes: int = 256

    def __post_init__(self):
        for name in ("idle_w", "comm_j_per_mb"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.report_bytes < 0:
            raise ConfigError(f"report_bytes must be >= 0, got {self.report_bytes}")


@dataclass(frozen=True)
class CatalogSource:
    """Where the implementation catalog comes from: a CSV path or a synth spec."""

    path: str | None = None
    synth_seed: int | None = None
    synth_n_per_platform: int | None = None

    def __post_init__(self):
        from_path = self.path is not None
        from_synth = self.synth_seed is not None or self.synth_n_per_platform is not None
        if from_path == from_synth:
            raise ConfigError("catalog must specify exactly one of 'path' or 'synth'")
        if from_synth and (self.synth_seed is None or self.synth_n_per_platform is None):
            raise ConfigError("catalog synth spec requires both 'seed' and 'n_per_platform'")

    def load(self, base_dir: Path) -> Catalog:
        if self.path is not None:
            return load_catalog(base_dir / self.path)
        return synth_catalog(self.synth_seed, self.synth_n_per_platform, SynthParams())


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    catalog: CatalogSource
    drones: tuple[DroneSpec, ...]
    zones: tuple[Zone, ...]
    security_profiles: Mapping[SecurityLevel, MissionConstraints]
    distribution: DistributionParams = field(default_factory=DistributionParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    duration_s: float = 300.0
    arrival_period_s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "drones", tuple(self.drones))
        object.__setattr__(self, "zones", tuple(self.zones))
        if not self.drones:
            raise ConfigError("scenario needs at least one drone")
        ids = [d.drone_id for d in self.drones]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate drone ids in {ids}")
        if not self.zones:
            raise ConfigError("scenario needs at least one zone")
        if self.zones[0].enter_time_s != 0.0:
            raise ConfigError("the first zone must start at t=0")
        times = [z.enter_time_s for z in self.zones]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"zone enter times must strictly increase, got {times}")
        if self.duration_s < 0 or not math.isfinite(self.duration_s):
            raise ConfigError(f"duration_s must be a finite value >= 0, got {self.duration_s}")
        for zone in self.zones[1:]:
            if zone.enter_time_s >= self.duration_s:
                raise ConfigError(
                    f"zone {zone.zone_id!r} enters at {zone.enter_time_s}, "
                    f"beyond duration {self.duration_s}"
                )
        if self.arrival_period_s <= 0:
            raise ConfigError(f"arrival_period_s must be > 0, got {self.arrival_period_s}")
        for level in (z.security for z in self.zones):
            if level not in self.security_profiles:
                raise ConfigError(f"no constraint profile for security level {level.label!r}")

    def zone_at(self, time_s: float) -> Zone:
        active = self.zones[0]
        for zone in self.zones:
            if zone.enter_time_s <= time_s:
                active = zone
        return active


def validate_against_catalog(config: ScenarioConfig, catalog: Catalog) -> None:
    """Every drone's platform must exist in the catalog."""
    present = catalog.platforms()
    for drone in config.drones:
        if drone.platform not in present:
            raise ConfigError(
                f"drone {drone.drone_id!r} uses platform {drone.platform.label!r}, "
                "which has no catalog entries"
            )


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def scenario_from_dict(data: Mapping) -> ScenarioConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("scenario document must be a JSON object")
    fields = _take(
        data,
        {
            "schema_version",
            "name",
            "catalog",
            "drones",
            "zones",
            "security_profiles",
            "distribution_params",
            "energy_params",
            "duration_s",
            "arrival_period_s",
        },
        "scenario",
    )
    version = fields.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    if "catalog" not in fields or "drones" not in fields or "zones" not in fields:
        raise ConfigError("scenario requires 'catalog', 'drones', and 'zones'")
    return ScenarioConfig(
        name=str(fields.get("name", "scenario")),
        catalog=_parse_catalog_source(fields["catalog"]),
        drones=tuple(_parse_drone(d) for d in _as_list(fields["drones"], "drones")),
        zones=tuple(_parse_zone(z) for z in _as_list(fields["zones"], "zones")),
        security_profiles=_parse_security_profiles(fields.get("security_profiles", {})),
        distribution=_parse_distribution(fields.get("distribution_params", {})),
        energy=_parse_energy(fields.get("energy_params", {})),
        duration_s=_as_number(fields.get("duration_s", 300.0), "duration_s"),
        arrival_period_s=_as_number(fields.get("arrival_period_s", 1.0), "arrival_period_s"),
    )


def _take(data, allowed: set[str], context: str) -> Mapping:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{context} must be a JSON object, got {data!r}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    return data


def _as_list(value, context: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(f"{context} must be a list")
    return value


def _as_number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context} must be a number, got {value!r}")
    return float(value)


def _parse_catalog_source(data) -> CatalogSource:
    if not isinstance(data, Mapping):
        raise ConfigError("catalog must be an object with 'path' or 'synth'")
    fields = _take(data, {"path", "synth"}, "catalog")
    if "path" in fields and "synth" in fields:
        raise ConfigError("catalog must specify exactly one of 'path' or 'synth'")
    if "path" in fields:
        return CatalogSource(path=str(fields["path"]))
    if "synth" in fields:
        synth = _take(fields["synth"], {"seed", "n_per_platform"}, "catalog.synth")
        if "seed" not in synth or "n_per_platform" not in synth:
            raise ConfigError("catalog.synth requires 'seed' and 'n_per_platform'")
        return CatalogSource(
            synth_seed=int(synth["seed"]),
            synth_n_per_platform=int(synth["n_per_platform"]),
        )
    raise ConfigError("catalog must specify exactly one of 'path' or 'synth'")


def _parse_drone(data) -> DroneSpec:
    fields = _take(
        data,
        {"drone_id", "platform", "storage_budget_mb", "battery_capacity_j", "cpu_reserved_frac"},
        "drone",
    )
    try:
        platform = PlatformKind.from_label(str(fields["platform"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except KeyError:
        raise ConfigError("drone requires 'platform'") from None
    try:
        return DroneSpec(
            drone_id=str(fields["drone_id"]),
            platform=platform,
            storage_budget_mb=_as_number(fields["storage_budget_mb"], "storage_budget_mb"),
            battery_capacity_j=_as_number(fields["battery_capacity_j"], "battery_capacity_j"),
            cpu_reserved_frac=_as_number(
                fields.get("cpu_reserved_frac", 0.0), "cpu_reserved_frac"
            ),
        )
    except KeyError as exc:
        raise ConfigError(f"drone requires {exc.args[0]!r}") from None


def _parse_zone(data) -> Zone:
    fields = _take(
        data,
        {"zone_id", "enter_time_s", "security", "attack_prob", "flow_rate_fps", "mean_flow_bytes"},
        "zone",
    )
    try:
        return Zone(
            zone_id=str(fields["zone_id"]),
            enter_time_s=_as_number(fields["enter_time_s"], "enter_time_s"),
            security=SecurityLevel.from_label(str(fields["security"])),
            attack_prob=_as_number(fields["attack_prob"], "attack_prob"),
            flow_rate_fps=_as_number(fields["flow_rate_fps"], "flow_rate_fps"),
            mean_flow_bytes=int(fields["mean_flow_bytes"]),
        )
    except KeyError as exc:
        raise ConfigError(f"zone requires {exc.args[0]!r}") from None


def constraints_from_dict(
    data: Mapping, base: MissionConstraints = MissionConstraints()
) -> MissionConstraints:
    """Build constraints from a JSON object; missing fields keep `base`,
    null limits mean unbounded."""
    if not isinstance(data, Mapping):
        raise ConfigError("constraints must be a JSON object")
    fields = _take(
        data,
        {"min_accuracy", "max_latency_ms", "max_energy_mj_per_flow", "max_memory_mb", "weights"},
        "constraints",
    )
    weights = fields.get("weights", base.weights)
    if not isinstance(weights, (list, tuple)):
        raise ConfigError(f"weights must be a list of 4 numbers, got {weights!r}")
    return MissionConstraints(
        min_accuracy=_limit(fields, "min_accuracy", base.min_accuracy),
        max_latency_ms=_limit(fields, "max_latency_ms", base.max_latency_ms),
        max_energy_mj_per_flow=_limit(
            fields, "max_energy_mj_per_flow", base.max_energy_mj_per_flow
        ),
        max_memory_mb=_limit(fields, "max_memory_mb", base.max_memory_mb),
        weights=tuple(weights),
    )


def _parse_security_profiles(data) -> dict[SecurityLevel, MissionConstraints]:
    if not isinstance(data, Mapping):
        raise ConfigError("security_profiles must be an object keyed by level")
    profiles = dict(DEFAULT_SECURITY_PROFILES)
    for label, overrides in data.items():
        level = SecurityLevel.from_label(str(label))
        try:
            profiles[level] = constraints_from_dict(overrides, DEFAULT_SECURITY_PROFILES[level])
        except ConfigError as exc:
            raise ConfigError(f"security_profiles.{label}: {exc}") from exc
    return profiles


def _limit(fields: Mapping, name: str, default: float) -> float:
    if name not in fields:
        return default
    value = fields[name]
    if value is None:
        return math.inf
    return _as_number(value, name)


def _parse_distribution(data) -> DistributionParams:
    fields = _take(
        data,
        {"alpha", "beta", "gamma", "epoch_period_s", "staleness_epochs"},
        "distribution_params",
    )
    defaults = DistributionParams()
    return DistributionParams(
        alpha=_as_number(fields.get("alpha", defaults.alpha), "alpha"),
        beta=_as_number(fields.get("beta", defaults.beta), "beta"),
        gamma=_as_number(fields.get("gamma", defaults.gamma), "gamma"),
        epoch_period_s=_as_number(
            fields.get("epoch_period_s", defaults.epoch_period_s), "epoch_period_s"
        ),
        staleness_epochs=int(fields.get("staleness_epochs", defaults.staleness_epochs)),
    )


def _parse_energy(data) -> EnergyParams:
    fields = _take(data, {"idle_w", "comm_j_per_mb", "report_bytes"}, "energy_params")
    defaults = EnergyParams()
    return EnergyParams(
        idle_w=_as_number(fields.get("idle_w", defaults.idle_w), "idle_w"),
        comm_j_per_mb=_as_number(
            fields.get("comm_j_per_mb", defaults.comm_j_per_mb), "comm_j_per_mb"
        ),
        report_bytes=int(fields.get("report_bytes", defaults.report_bytes)),
    )


def bundled_scenario_text() -> str:
    return resources.files("idswarm.data").joinpath("default_scenario.json").read_text("utf-8")


def load_bundled_scenario() -> ScenarioConfig:
    """The packaged 5-drone, 3-zone patrol scenario."""
    return scenario_from_dict(json.loads(bundled_scenario_text()))
