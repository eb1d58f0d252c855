"""Models package initialization - domain and result types."""
from lcg.models.game import (
    ActionProfile,
    AssumptionCheck,
    BeliefConfig,
    GameFamily,
    GameSpec,
    StateVector,
    UtilityVector,
    ValidationReport,
    Vector,
    Weights,
    default_bounds,
)
from lcg.models.results import (
    ConservativenessProfile,
    DynamicsConfig,
    EquilibriumKind,
    EquilibriumResult,
    Outcome,
    PoAReport,
    SpectrumResult,
    StabilityReport,
    Trajectory,
    TrajectoryRecord,
    UpdateRule,
)

__all__ = [
    "ActionProfile",
    "AssumptionCheck",
    "BeliefConfig",
    "ConservativenessProfile",
    "DynamicsConfig",
    "EquilibriumKind",
    "EquilibriumResult",
    "GameFamily",
    "GameSpec",
    "Outcome",
    "PoAReport",
    "SpectrumResult",
    "StabilityReport",
    "StateVector",
    "Trajectory",
    "TrajectoryRecord",
    "UpdateRule",
    "UtilityVector",
    "ValidationReport",
    "Vector",
    "Weights",
    "default_bounds",
]
