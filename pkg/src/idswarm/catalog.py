"""Implementation catalog: schema, CSV loading/saving, and seeded synthesis.

A catalog describes intrusion-detection implementations characterized on
embedded platforms: per-flow QoS metrics (accuracy, latency, energy) and
resource footprints (memory, storage). Real measurement campaigns produce
the same schema; the synthesizer exists so experiments run without
hardware data.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping

from .errors import GenerationError, ParseError, ValidationError


class PlatformKind(Enum):
    """Execution platform class; the value is the canonical catalog label."""

    CPU_SBC = "rpi4b"
    GPU_SOC = "jetson-xavier"
    FPGA_SOC = "pynq-z2"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "PlatformKind":
        for kind in cls:
            if kind.value == label:
                return kind
        known = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown platform {label!r} (expected one of: {known})")


CANONICAL_PLATFORM_LABELS = tuple(kind.label for kind in PlatformKind)


@dataclass(frozen=True)
class ModelFamily:
    """Detection model family; ``other`` carries a free-form variant name."""

    kind: str
    variant: str = ""

    KINDS = ("random_forest", "dnn", "other")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown model family kind {self.kind!r}")
        if self.kind == "other" and not self.variant:
            raise ValueError("model family 'other' requires a variant name")
        if self.kind != "other" and self.variant:
            raise ValueError(f"model family {self.kind!r} takes no variant")

    @classmethod
    def parse(cls, text: str) -> "ModelFamily":
        if text in ("random_forest", "dnn"):
            return cls(text)
        if text.startswith("other:") and len(text) > len("other:"):
            return cls("other", text.split(":", 1)[1])
        raise ValueError(
            f"unknown model family {text!r} (expected random_forest, dnn, or other:<name>)"
        )

    def __str__(self) -> str:
        return f"other:{self.variant}" if self.kind == "other" else self.kind


RANDOM_FOREST = ModelFamily("random_forest")
DNN = ModelFamily("dnn")


@dataclass(frozen=True)
class ImplementationProfile:
    """One characterized implementation: model family x platform x metrics.

    accuracy is the per-flow correct-classification probability; latency_ms
    and energy_mj are per-flow means; memory_mb and storage_mb are runtime
    and on-disk footprints in MiB.
    """

    id: str
    model_family: ModelFamily
    platform: PlatformKind
    accuracy: float
    latency_ms: float
    energy_mj: float
    memory_mb: float
    storage_mb: float

    def __post_init__(self):
        if not self.id:
            raise ValidationError("implementation id must be non-empty", field="id")
        if not (math.isfinite(self.accuracy) and 0.0 <= self.accuracy <= 1.0):
            raise ValidationError(
                f"accuracy must lie in [0, 1], got {self.accuracy}", field="accuracy"
            )
        for name in ("latency_ms", "energy_mj", "memory_mb", "storage_mb"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValidationError(
                    f"{name} must be a positive finite real, got {value}", field=name
                )


@dataclass(frozen=True)
class Catalog:
    """Ordered, duplicate-free collection of implementation profiles."""

    entries: tuple[ImplementationProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[str] = set()
        for entry in self.entries:
            if entry.id in seen:
                raise ValidationError(
                    f"duplicate implementation id {entry.id!r}", field="id"
                )
            seen.add(entry.id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ImplementationProfile]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> ImplementationProfile:
        return self.entries[index]

    @property
    def by_id(self) -> dict[str, ImplementationProfile]:
        return {entry.id: entry for entry in self.entries}

    def for_platform(self, platform: PlatformKind) -> list[ImplementationProfile]:
        return [entry for entry in self.entries if entry.platform is platform]

    def platforms(self) -> set[PlatformKind]:
        return {entry.platform for entry in self.entries}


CSV_COLUMNS = (
    "id",
    "model_family",
    "platform",
    "accuracy",
    "latency_ms",
    "energy_mj",
    "memory_mb",
    "storage_mb",
)

_FLOAT_COLUMNS = ("accuracy", "latency_ms", "energy_mj", "memory_mb", "storage_mb")


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog CSV; entry order equals file row order.

    Columns beyond the canonical eight (e.g. richer quality metrics) are
    ignored. Raises ParseError for malformed rows/fields and
    ValidationError for range or uniqueness violations; both name the
    offending row (file line number, header = line 1) and field.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header row") from None
        if tuple(header[: len(CSV_COLUMNS)]) != CSV_COLUMNS:
            raise ParseError(
                f"{path}: bad header {header!r}, expected {','.join(CSV_COLUMNS)}", row=1
            )
        width = len(header)
        entries = []
        seen: set[str] = set()
        for line, raw in enumerate(reader, start=2):
            if not raw:
                continue
            entry = _parse_row(raw, line, width)
            if entry.id in seen:
                raise ValidationError(
                    f"duplicate implementation id {entry.id!r}", row=line, field="id"
                )
            seen.add(entry.id)
            entries.append(entry)
    return Catalog(tuple(entries))


def _parse_row(raw: list[str], line: int, width: int) -> ImplementationProfile:
    if len(raw) != width:
        raise ParseError(f"expected {width} columns, got {len(raw)}", row=line)
    record = dict(zip(CSV_COLUMNS, raw))
    try:
        family = ModelFamily.parse(record["model_family"])
    except ValueError as exc:
        raise ParseError(str(exc), row=line, field="model_family") from exc
    try:
        platform = PlatformKind.from_label(record["platform"])
    except ValueError as exc:
        raise ParseError(str(exc), row=line, field="platform") from exc
    numbers = {}
    for column in _FLOAT_COLUMNS:
        text = record[column]
        try:
            numbers[column] = float(text)
        except ValueError as exc:
            raise ParseError(f"not a number: {text!r}", row=line, field=column) from exc
    try:
        return ImplementationProfile(
            id=record["id"], model_family=family, platform=platform, **numbers
        )
    except ValidationError as exc:
        raise ValidationError(str(exc), row=line, field=exc.field) from exc


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    """Write the catalog CSV; output is byte-deterministic for equal catalogs."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for entry in catalog:
            writer.writerow(
                [
                    entry.id,
                    str(entry.model_family),
                    entry.platform.label,
                    repr(entry.accuracy),
                    repr(entry.latency_ms),
                    repr(entry.energy_mj),
                    repr(entry.memory_mb),
                    repr(entry.storage_mb),
                ]
            )


@dataclass(frozen=True)
class MetricBands:
    """Per-platform sampling bands for synthesis (low, high)."""

    latency_ms: tuple[float, float]
    energy_mj: tuple[float, float]
    memory_mb: tuple[float, float]
    storage_mb: tuple[float, float]
    accuracy: tuple[float, float]


DEFAULT_BANDS: Mapping[PlatformKind, MetricBands] = {
    PlatformKind.CPU_SBC: MetricBands(
        latency_ms=(5.0, 80.0),
        energy_mj=(20.0, 400.0),
        memory_mb=(50.0, 800.0),
        storage_mb=(5.0, 300.0),
        accuracy=(0.70, 0.98),
    ),
    PlatformKind.GPU_SOC: MetricBands(
        latency_ms=(2.0, 40.0),
        energy_mj=(50.0, 800.0),
        memory_mb=(100.0, 2000.0),
        storage_mb=(10.0, 800.0),
        accuracy=(0.75, 0.99),
    ),
    PlatformKind.FPGA_SOC: MetricBands(
        latency_ms=(1.0, 20.0),
        energy_mj=(5.0, 100.0),
        memory_mb=(30.0, 400.0),
        storage_mb=(2.0, 100.0),
        accuracy=(0.68, 0.97),
    ),
}


@dataclass(frozen=True)
class SynthParams:
    """Knobs for the seeded generator; defaults produce clear trade-offs."""

    bands: Mapping[PlatformKind, MetricBands] = field(
        default_factory=lambda: dict(DEFAULT_BANDS)
    )
    accuracy_noise: float = 0.015
    dnn_fraction: float = 0.5
    max_retries: int = 32


def synth_catalog(
    seed: int, n_per_platform: int, params: SynthParams | None = None
) -> Catalog:
    """Generate a reproducible catalog of n_per_platform entries per platform.

    Latency, energy, memory, and storage are drawn log-uniformly within the
    platform's bands; accuracy rises with latency rank (plus noise), so fast
    implementations trade accuracy away and per-platform Pareto fronts keep
    at least two members. Pure function of (seed, n_per_platform, params).
    """
    if n_per_platform < 1:
        raise ValueError(f"n_per_platform must be >= 1, got {n_per_platform}")
    params = params or SynthParams()
    rng = random.Random(seed)
    entries: list[ImplementationProfile] = []
    for platform in PlatformKind:
        bands = params.bands[platform]
        entries.extend(_synth_platform(rng, platform, n_per_platform, bands, params))
    return Catalog(tuple(entries))


def _synth_platform(
    rng: random.Random,
    platform: PlatformKind,
    count: int,
    bands: MetricBands,
    params: SynthParams,
) -> list[ImplementationProfile]:
    for _ in range(params.max_retries):
        latencies = [_log_uniform(rng, *bands.latency_ms) for _ in range(count)]
        energies = [_log_uniform(rng, *bands.energy_mj) for _ in range(count)]
        memories = [_log_uniform(rng, *bands.memory_mb) for _ in range(count)]
        storages = [_log_uniform(rng, *bands.storage_mb) for _ in range(count)]
        acc_lo, acc_hi = bands.accuracy
        ranks = _ranks(latencies)
        accuracies = []
        for i in range(count):
            t = ranks[i] / (count - 1) if count > 1 else 1.0
            noisy = acc_lo + t * (acc_hi - acc_lo) + rng.gauss(0.0, params.accuracy_noise)
            accuracies.append(min(acc_hi, max(acc_lo, noisy)))
        families = [
            DNN if rng.random() < params.dnn_fraction else RANDOM_FOREST
            for _ in range(count)
        ]
        profiles = [
            ImplementationProfile(
                id=f"{platform.label}-{_FAMILY_SHORT[families[i].kind]}-{i:02d}",
                model_family=families[i],
                platform=platform,
                accuracy=accuracies[i],
                latency_ms=latencies[i],
                energy_mj=energies[i],
                memory_mb=memories[i],
                storage_mb=storages[i],
            )
            for i in range(count)
        ]
        if count < 4 or _front_size(profiles) >= 2:
            return profiles
    raise GenerationError(
        f"could not reach a Pareto front of >= 2 entries for {platform.label} "
        f"within {params.max_retries} attempts"
    )


_FAMILY_SHORT = {"random_forest": "rf", "dnn": "dnn", "other": "oth"}


def _log_uniform(rng: random.Random, lo: float, hi: float) -> float:
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def _ranks(values: list[float]) -> list[int]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0] * len(values)
    for rank, index in enumerate(order):
        ranks[index] = rank
    return ranks


def _front_size(profiles: list[ImplementationProfile]) -> int:
    # Local dominance count over (-accuracy, latency, energy, memory);
    # the pareto module is the public API but would be a circular import here.
    vectors = [
        (-p.accuracy, p.latency_ms, p.energy_mj, p.memory_mb) for p in profiles
    ]
    size = 0
    for i, b in enumerate(vectors):
        dominated = False
        for j, a in enumerate(vectors):
            if j == i:
                continue
            if all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b)):
                dominated = True
                break
        if not dominated:
            size += 1
    return size
