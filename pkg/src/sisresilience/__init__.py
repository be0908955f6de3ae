"""SIS malware-spread simulator with risk-perception feedback and resilience metrics."""
__version__ = "0.1.0"

from .dynamics import (
    PerceptionParams,
    RunConfig,
    RunRecord,
    SeedingSpec,
    SimState,
    effective_tau,
    infection_probability,
    run,
    seed_infection,
    step,
    update_perception,
)
from .metrics import ResilienceReport, countermeasure_cost, critical_functionality, outbreak_stats, resilience
from .sweeps import SweepSpec, ThresholdEstimate, estimate_threshold, survival_probability, sweep
from .topology import (
    DegreeStats,
    LatticeSpec,
    ScaleFreeSpec,
    Topology,
    build_lattice,
    build_scale_free,
    degree_stats,
    from_edges,
    load_edge_list,
    mean_field_threshold,
)

__all__ = [
    "DegreeStats", "LatticeSpec", "PerceptionParams", "ResilienceReport", "RunConfig", "RunRecord",
    "ScaleFreeSpec", "SeedingSpec", "SimState", "SweepSpec", "ThresholdEstimate", "Topology",
    "build_lattice", "build_scale_free", "countermeasure_cost", "critical_functionality", "degree_stats",
    "effective_tau", "estimate_threshold", "from_edges", "infection_probability", "load_edge_list",
    "mean_field_threshold", "outbreak_stats", "resilience", "run", "seed_infection", "step",
    "survival_probability", "sweep", "update_perception",
]
