"""Offline implementation shortlisting: storage filter plus Pareto front.

Objectives are compared in canonical minimization form
(-accuracy, latency_ms, energy_mj, memory_mb); storage is a hard
constraint, never an objective.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .catalog import Catalog, ImplementationProfile, PlatformKind

ObjectiveVector = tuple[float, float, float, float]

OBJECTIVE_NAMES = ("neg_accuracy", "latency_ms", "energy_mj", "memory_mb")


def objective_vector(profile: ImplementationProfile) -> ObjectiveVector:
    """Canonical minimization vector for a profile."""
    return (-profile.accuracy, profile.latency_ms, profile.energy_mj, profile.memory_mb)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Weak Pareto dominance: a <= b componentwise and a < b somewhere."""
    if len(a) != len(b):
        raise ValueError(f"objective vectors differ in length: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            strict = True
    return strict


def pareto_front(profiles: Iterable[ImplementationProfile]) -> list[ImplementationProfile]:
    """Entries not dominated by any other entry, in input order.

    Entries equal in objective space never dominate each other, so
    duplicates are all kept. Plain O(n^2) scan with the dominance test
    unrolled; desk-scale catalogs make asymptotics irrelevant.
    """
    profiles = list(profiles)
    vectors = [objective_vector(p) for p in profiles]
    front = []
    for i, (b0, b1, b2, b3) in enumerate(vectors):
        dominated = False
        for j, (a0, a1, a2, a3) in enumerate(vectors):
            if j == i:
                continue
            if (
                a0 <= b0
                and a1 <= b1
                and a2 <= b2
                and a3 <= b3
                and (a0 < b0 or a1 < b1 or a2 < b2 or a3 < b3)
            ):
                dominated = True
                break
        if not dominated:
            front.append(profiles[i])
    return front


def filter_storage(
    profiles: Iterable[ImplementationProfile], storage_budget_mb: float
) -> list[ImplementationProfile]:
    """Entries whose on-disk footprint fits the budget, in input order."""
    if storage_budget_mb <= 0:
        raise ValueError(f"storage_budget_mb must be > 0, got {storage_budget_mb}")
    return [p for p in profiles if p.storage_mb <= storage_budget_mb]


def offline_select(
    catalog: Catalog, drone_platform: PlatformKind, storage_budget_mb: float
) -> list[ImplementationProfile]:
    """Storage-feasible Pareto front of the platform's catalog entries.

    Filtering precedes front extraction so feasible entries shadowed by
    infeasible dominators remain selectable. May be empty.
    """
    matching = catalog.for_platform(drone_platform)
    return pareto_front(filter_storage(matching, storage_budget_mb))
