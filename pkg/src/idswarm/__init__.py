"""idswarm: deterministic simulation and optimization of intrusion-detection
workload placement across a heterogeneous drone swarm.

The pipeline: characterize (or synthesize) a catalog of detection
implementations per platform, shortlist each drone's candidates offline
(storage filter + Pareto front), pick the running implementation online
per mission zone (constraint filter + normalized weighted trade-off), and
distribute traffic across the swarm from broadcast capacity reports.
"""

from .catalog import (
    Catalog,
    ImplementationProfile,
    ModelFamily,
    PlatformKind,
    SynthParams,
    load_catalog,
    save_catalog,
    synth_catalog,
)
from .distributor import (
    AssignmentPlan,
    CapacityReport,
    CostBreakdown,
    DistributionParams,
    FlowBatch,
    brute_force_distribute,
    distribute_flows,
    merge_reports,
    self_assess,
)
from .pareto import dominates, filter_storage, objective_vector, offline_select, pareto_front
from .scenario import (
    DroneSpec,
    EnergyParams,
    ScenarioConfig,
    Zone,
    load_bundled_scenario,
    load_scenario,
)
from .selector import (
    DEFAULT_SECURITY_PROFILES,
    MissionConstraints,
    SecurityLevel,
    SelectionDecision,
    SelectionRationale,
    feasible_set,
    normalize,
    select_online,
)
from .simulator import (
    DetectionOutcome,
    DroneState,
    Event,
    EventKind,
    SimMetrics,
    SimResult,
    Simulation,
    account_energy,
    flow_stream,
    run,
    sample_detection,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentPlan",
    "Catalog",
    "CapacityReport",
    "CostBreakdown",
    "DEFAULT_SECURITY_PROFILES",
    "DetectionOutcome",
    "DistributionParams",
    "DroneSpec",
    "DroneState",
    "EnergyParams",
    "Event",
    "EventKind",
    "FlowBatch",
    "ImplementationProfile",
    "MissionConstraints",
    "ModelFamily",
    "PlatformKind",
    "ScenarioConfig",
    "SecurityLevel",
    "SelectionDecision",
    "SelectionRationale",
    "SimMetrics",
    "SimResult",
    "Simulation",
    "SynthParams",
    "Zone",
    "account_energy",
    "brute_force_distribute",
    "distribute_flows",
    "dominates",
    "feasible_set",
    "filter_storage",
    "flow_stream",
    "load_bundled_scenario",
    "load_catalog",
    "load_scenario",
    "merge_reports",
    "normalize",
    "objective_vector",
    "offline_select",
    "pareto_front",
    "run",
    "sample_detection",
    "save_catalog",
    "select_online",
    "self_assess",
    "synth_catalog",
]
