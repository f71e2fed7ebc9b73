"""Online implementation choice: mission-constraint filter plus scalarized trade-off.

Each drone runs this independently per decision epoch over its offline
shortlist. The best trade-off is the minimum weighted sum of min-max
normalized objectives, so any positive affine rescaling of a raw
objective cannot change the winner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Sequence

from .catalog import ImplementationProfile
from .errors import ConfigError, EmptyFeasibleSet, EmptyShortlist
from .pareto import ObjectiveVector, objective_vector

WEIGHT_SUM_TOLERANCE = 1e-9


class SecurityLevel(IntEnum):
    """Required security posture of a mission zone; totally ordered."""

    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "SecurityLevel":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ConfigError(
                f"unknown security level {label!r} (expected low, medium, or high)"
            ) from None


@dataclass(frozen=True)
class MissionConstraints:
    """Live mission bounds plus scalarization weights.

    Unbounded limits are math.inf. Weights align with the canonical
    objective order (-accuracy, latency_ms, energy_mj, memory_mb) and must
    be non-negative and sum to 1.
    """

    min_accuracy: float = 0.0
    max_latency_ms: float = math.inf
    max_energy_mj_per_flow: float = math.inf
    max_memory_mb: float = math.inf
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not 0.0 <= self.min_accuracy <= 1.0:
            raise ConfigError(f"min_accuracy must lie in [0, 1], got {self.min_accuracy}")
        for name in ("max_latency_ms", "max_energy_mj_per_flow", "max_memory_mb"):
            value = getattr(self, name)
            if math.isnan(value) or value <= 0:
                raise ConfigError(f"{name} must be > 0 (math.inf for unbounded), got {value}")
        if len(self.weights) != 4:
            raise ConfigError(f"weights must have 4 entries, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise ConfigError(f"weights must be non-negative, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ConfigError(f"weights must sum to 1, got sum {sum(self.weights)!r}")

    def violations(self, profile: ImplementationProfile) -> int:
        """Number of bounded constraints the profile breaks (0..4)."""
        count = 0
        if profile.accuracy < self.min_accuracy:
            count += 1
        if profile.latency_ms > self.max_latency_ms:
            count += 1
        if profile.energy_mj > self.max_energy_mj_per_flow:
            count += 1
        if profile.memory_mb > self.max_memory_mb:
            count += 1
        return count

    def satisfied_by(self, profile: ImplementationProfile) -> bool:
        return self.violations(profile) == 0


DEFAULT_SECURITY_PROFILES: Mapping[SecurityLevel, MissionConstraints] = {
    SecurityLevel.LOW: MissionConstraints(min_accuracy=0.70, weights=(0.2, 0.3, 0.4, 0.1)),
    SecurityLevel.MEDIUM: MissionConstraints(min_accuracy=0.85, weights=(0.4, 0.3, 0.2, 0.1)),
    SecurityLevel.HIGH: MissionConstraints(min_accuracy=0.95, weights=(0.6, 0.2, 0.1, 0.1)),
}


class SelectionRationale(str, Enum):
    SCALARIZED = "scalarized"
    SINGLE_FEASIBLE = "single_feasible"
    FALLBACK_INFEASIBLE = "fallback_infeasible"


@dataclass(frozen=True)
class SelectionDecision:
    """Outcome of one online selection: winner, scores, and why."""

    chosen: str
    feasible_count: int
    scores: Mapping[str, float]
    rationale: SelectionRationale

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen,
            "feasible_count": self.feasible_count,
            "scores": dict(self.scores),
            "rationale": self.rationale.value,
        }


def feasible_set(
    shortlist: Iterable[ImplementationProfile], constraints: MissionConstraints
) -> list[ImplementationProfile]:
    """Entries satisfying every bounded constraint, in input order."""
    return [p for p in shortlist if constraints.satisfied_by(p)]


def normalize(
    feasible: Sequence[ImplementationProfile],
) -> dict[str, ObjectiveVector]:
    """Min-max scale each objective over the given set into [0, 1].

    An objective constant across the set maps to 0 for every entry.
    """
    if not feasible:
        raise EmptyFeasibleSet("cannot normalize an empty feasible set")
    raw = {p.id: objective_vector(p) for p in feasible}
    lows = [min(vec[axis] for vec in raw.values()) for axis in range(4)]
    highs = [max(vec[axis] for vec in raw.values()) for axis in range(4)]
    scaled = {}
    for pid, vec in raw.items():
        scaled[pid] = tuple(
            0.0 if highs[axis] == lows[axis] else (vec[axis] - lows[axis]) / (highs[axis] - lows[axis])
            for axis in range(4)
        )
    return scaled


def _tie_key(profile: ImplementationProfile) -> tuple:
    return (-profile.accuracy, profile.energy_mj, profile.id)


def select_online(
    shortlist: Sequence[ImplementationProfile],
    constraints: MissionConstraints,
    current: str | None = None,
    switch_penalty: float = 0.0,
) -> SelectionDecision:
    """Pick the implementation with the best constrained trade-off.

    Feasible entries are ranked by the weighted sum of their normalized
    objectives; ties break by higher accuracy, lower energy, then id. When
    nothing is feasible the least-bad entry of the whole shortlist keeps
    running (fewest violated constraints, then the same scoring), rather
    than disabling detection.

    `current` matters only when switch_penalty > 0: every other candidate's
    score is bumped by the penalty, a configurable hysteresis.
    """
    shortlist = list(shortlist)
    if not shortlist:
        raise EmptyShortlist("shortlist contains no implementations")
    feasible = feasible_set(shortlist, constraints)
    pool = feasible if feasible else shortlist
    scaled = normalize(pool)
    weights = constraints.weights
    scores = {}
    for profile in pool:
        score = sum(w * x for w, x in zip(weights, scaled[profile.id]))
        if switch_penalty > 0.0 and current is not None and profile.id != current:
            score += switch_penalty
        scores[profile.id] = score
    if feasible:
        chosen = min(feasible, key=lambda p: (scores[p.id], *_tie_key(p)))
        rationale = (
            SelectionRationale.SINGLE_FEASIBLE
            if len(feasible) == 1
            else SelectionRationale.SCALARIZED
        )
        return SelectionDecision(chosen.id, len(feasible), scores, rationale)
    chosen = min(
        shortlist, key=lambda p: (constraints.violations(p), scores[p.id], *_tie_key(p))
    )
    return SelectionDecision(chosen.id, 0, scores, SelectionRationale.FALLBACK_INFEASIBLE)
