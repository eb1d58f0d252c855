"""Pydantic schemas for scenario documents and run reports."""
from typing import Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from lcg.config import settings
from lcg.exceptions import ConfigError
from lcg.models.game import BeliefConfig, GameFamily, GameSpec, ValidationReport, Weights
from lcg.models.results import (
    ConservativenessProfile,
    DynamicsConfig,
    EquilibriumResult,
    Outcome,
    PoAReport,
    StabilityReport,
    UpdateRule,
)


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    path = ".".join(str(part) for part in error["loc"])
    return f"{path}: {error['msg']}" if path else error["msg"]


# Scenario Schemas
class DynamicsSection(BaseModel):
    rule: UpdateRule = UpdateRule.BEST_RESPONSE
    epsilon: PositiveFloat = 1.0
    initial: Optional[list[NonNegativeFloat]] = None
    max_iters: PositiveInt = Field(default_factory=lambda: settings.dynamics_max_iters)
    tol: PositiveFloat = Field(default_factory=lambda: settings.dynamics_tol)
    divergence_threshold: PositiveFloat = Field(default_factory=lambda: settings.divergence_threshold)
    clamp: bool = Field(default_factory=lambda: settings.dynamics_clamp)

    model_config = ConfigDict(extra="forbid")


class ScenarioFile(BaseModel):
    """One game plus optional weights, beliefs and dynamics settings."""

    family: GameFamily
    mu: Union[PositiveFloat, list[PositiveFloat]]
    beta: list[PositiveFloat] = Field(min_length=1)
    tau: list[PositiveFloat] = Field(min_length=1)
    action_bounds: Optional[list[tuple[NonNegativeFloat, PositiveFloat]]] = None
    weights: Optional[list[NonNegativeFloat]] = None
    lambda_: Optional[list[PositiveFloat]] = Field(default=None, alias="lambda")
    dynamics: Optional[DynamicsSection] = None

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ScenarioFile":
        n = len(self.beta)
        sized = {
            "tau": self.tau,
            "mu": self.mu if isinstance(self.mu, list) else None,
            "action_bounds": self.action_bounds,
            "weights": self.weights,
            "lambda": self.lambda_,
            "dynamics.initial": self.dynamics.initial if self.dynamics else None,
        }
        for name, values in sized.items():
            if values is not None and len(values) != n:
                raise ValueError(f"{name} has length {len(values)}, expected {n} (length of beta)")
        try:
            self.to_game_spec()
            if self.weights is not None:
                Weights(omega=tuple(self.weights))
        except ValidationError as exc:
            raise ValueError(_first_error(exc)) from None
        return self

    @classmethod
    def from_spec(
        cls,
        spec: GameSpec,
        weights: Optional[Weights] = None,
        beliefs: Optional[BeliefConfig] = None,
        dynamics: Optional[DynamicsConfig] = None,
    ) -> "ScenarioFile":
        """Resolved scenario document for a spec (bounds written out explicitly)."""
        section = None
        if dynamics is not None:
            section = DynamicsSection(**dynamics.model_dump(mode="python") | {"initial": list(dynamics.initial)})
        return cls(
            family=spec.family,
            mu=spec.mu if isinstance(spec.mu, float) else list(spec.mu),
            beta=list(spec.beta),
            tau=list(spec.tau),
            action_bounds=list(zip(spec.action_lower, spec.action_upper)),
            weights=list(weights.omega) if weights is not None else None,
            lambda_=list(beliefs.lambda_) if beliefs is not None else None,
            dynamics=section,
        )

    def to_game_spec(self) -> GameSpec:
        bounds = {}
        if self.action_bounds:
            bounds = {
                "action_lower": tuple(lo for lo, _ in self.action_bounds),
                "action_upper": tuple(hi for _, hi in self.action_bounds),
            }
        mu = tuple(self.mu) if isinstance(self.mu, list) else self.mu
        return GameSpec(family=self.family, beta=tuple(self.beta), tau=tuple(self.tau), mu=mu, **bounds)

    def to_weights(self) -> Weights:
        if self.weights is None:
            raise ConfigError("missing required field (pass it in the scenario or with --weights)", field_path="weights")
        return Weights(omega=tuple(self.weights))

    def to_beliefs(self) -> BeliefConfig:
        if self.lambda_ is None:
            raise ConfigError("missing required field (pass it in the scenario or with --lambda)", field_path="lambda")
        return BeliefConfig.from_slopes(self.lambda_)

    def to_dynamics_config(self, spec: GameSpec) -> DynamicsConfig:
        """Dynamics settings; the initial profile defaults to the middle of the action box."""
        if self.dynamics is None:
            raise ConfigError("missing required section", field_path="dynamics")
        section = self.dynamics
        initial = section.initial
        if initial is None:
            initial = [0.5 * (lo + hi) for lo, hi in zip(spec.action_lower, spec.action_upper)]
        for n, (value, lo, hi) in enumerate(zip(initial, spec.action_lower, spec.action_upper)):
            if not lo <= value <= hi:
                raise ConfigError(
                    f"user {n + 1} starts at {value:g}, outside its action bounds [{lo:g}, {hi:g}]",
                    field_path="dynamics.initial",
                )
        return DynamicsConfig(
            rule=section.rule,
            epsilon=section.epsilon,
            initial=tuple(initial),
            max_iters=section.max_iters,
            tol=section.tol,
            divergence_threshold=section.divergence_threshold,
            clamp=section.clamp,
        )


# Report Schemas
class TrajectoryRow(BaseModel):
    """One iterate; NaN or infinite entries of a diverged run are null."""

    t: int
    a: list[Optional[float]]
    u: list[Optional[float]]
    s: list[Optional[float]]


class TrajectoryPayload(BaseModel):
    rule: UpdateRule
    outcome: Outcome
    iterations: int
    final_actions: list[Optional[float]]
    out_path: Optional[str] = None
    records: list[TrajectoryRow] = []


class RunReport(BaseModel):
    """Everything one command produced: echo, resolved scenario, result, timing."""

    command: str
    scenario_path: Optional[str] = None
    scenario: ScenarioFile
    equilibrium: Optional[EquilibriumResult] = None
    poa: Optional[PoAReport] = None
    stability: Optional[StabilityReport] = None
    conservativeness: Optional[ConservativenessProfile] = None
    validation: Optional[ValidationReport] = None
    trajectory: Optional[TrajectoryPayload] = None
    # --epsilon given on the command line
    epsilon: Optional[PositiveFloat] = None
    duration_ms: float = 0.0

    model_config = ConfigDict(populate_by_name=True)


class SweepFailure(BaseModel):
    """One line of `--sweep` output for a scenario that failed."""

    scenario_path: str
    exit_code: int
    error: str
