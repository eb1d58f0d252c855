"""Result types returned by the solver, analysis and dynamics services."""
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from lcg.config import settings
from lcg.models.game import Vector, Weights


class EquilibriumKind(str, Enum):
    NASH = "nash"
    PARETO_POINT = "pareto"
    CONJECTURAL = "conjectural"


class EquilibriumResult(BaseModel):
    """An equilibrium action profile with its utilities and first-order residual."""

    model_config = ConfigDict(frozen=True)

    kind: EquilibriumKind
    actions: tuple[float, ...]
    utilities: tuple[float, ...]
    states: tuple[float, ...]
    weights_used: Optional[Weights] = None
    residual: NonNegativeFloat
    objective: Optional[float] = None

    @property
    def actions_array(self) -> Vector:
        return np.asarray(self.actions, dtype=float)

    @property
    def utilities_array(self) -> Vector:
        return np.asarray(self.utilities, dtype=float)


class PoAReport(BaseModel):
    """Weighted log-utility gap between the NE and the Pareto point, with bounds."""

    model_config = ConfigDict(frozen=True)

    gap: float
    gap_evaluated: float
    lower_bound: float
    upper_bound: float = 0.0
    weights_used: Weights

    @property
    def within_bounds(self) -> bool:
        return self.lower_bound < self.gap < self.upper_bound


class ConservativenessProfile(BaseModel):
    """Per-user conservativeness tau_n / lambda_n and its total."""

    model_config = ConfigDict(frozen=True)

    c: tuple[float, ...]
    total: float

    @property
    def pareto_optimal(self) -> bool:
        """Beliefs lead to a Pareto point exactly when the ratios sum to one."""
        return abs(self.total - 1.0) < settings.weights_sum_tolerance


class SpectrumResult(BaseModel):
    """Eigenvalues of an iteration Jacobian (real, with multiplicity)."""

    model_config = ConfigDict(frozen=True)

    eigenvalues: tuple[float, ...]
    spectral_radius: NonNegativeFloat
    q_at_minus_one: float

    @property
    def min_eigenvalue(self) -> float:
        return min(self.eigenvalues)

    @property
    def max_eigenvalue(self) -> float:
        return max(self.eigenvalues)


class StabilityReport(BaseModel):
    """Convergence verdict for best-response and Jacobi dynamics."""

    model_config = ConfigDict(frozen=True)

    spectrum: SpectrumResult
    condition_value: float
    br_converges: bool
    jacobi_epsilon_bound: PositiveFloat

    @property
    def convergence_rate(self) -> float:
        """Asymptotic contraction factor of best response (its spectral radius)."""
        return self.spectrum.spectral_radius

    def jacobi_converges(self, epsilon: float) -> bool:
        return 0.0 < epsilon < self.jacobi_epsilon_bound


class UpdateRule(str, Enum):
    BEST_RESPONSE = "best_response"
    JACOBI = "jacobi"


class DynamicsConfig(BaseModel):
    """Iteration settings for best-response / Jacobi simulation."""

    model_config = ConfigDict(frozen=True)

    rule: UpdateRule = UpdateRule.BEST_RESPONSE
    epsilon: PositiveFloat = 1.0
    initial: tuple[float, ...] = Field(min_length=1)
    max_iters: PositiveInt = Field(default_factory=lambda: settings.dynamics_max_iters)
    tol: PositiveFloat = Field(default_factory=lambda: settings.dynamics_tol)
    divergence_threshold: PositiveFloat = Field(default_factory=lambda: settings.divergence_threshold)
    clamp: bool = Field(default_factory=lambda: settings.dynamics_clamp)

    @model_validator(mode="after")
    def _check_initial(self) -> "DynamicsConfig":
        if any(x < 0 for x in self.initial):
            raise ValueError("initial actions must be nonnegative")
        return self


class Outcome(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS_REACHED = "max_iters_reached"
    DIVERGED = "diverged"


class TrajectoryRecord(NamedTuple):
    t: int
    a: Vector
    s: Vector
    u: Vector


@dataclass(frozen=True)
class Trajectory:
    """
    Time-indexed dynamics record.

    Row t of each matrix holds the iterate a^t and its states/utilities;
    row 0 is the initial profile.
    """
    actions: np.ndarray
    states: np.ndarray
    utilities: np.ndarray
    outcome: Outcome
    rule: UpdateRule

    @property
    def iterations(self) -> int:
        return self.actions.shape[0] - 1

    @property
    def final_actions(self) -> Vector:
        return self.actions[-1]

    @property
    def converged(self) -> bool:
        return self.outcome is Outcome.CONVERGED

    @property
    def records(self) -> Iterator[TrajectoryRecord]:
        for t in range(self.actions.shape[0]):
            yield TrajectoryRecord(t, self.actions[t], self.states[t], self.utilities[t])

    def first_within(self, target, distance: float) -> Optional[int]:
        """First iteration index whose profile is within `distance` (inf-norm) of target."""
        gaps = np.max(np.abs(self.actions - np.asarray(target, dtype=float)), axis=1)
        hits = np.flatnonzero(gaps < distance)
        return int(hits[0]) if hits.size else None
