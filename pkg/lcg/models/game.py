"""
Game description types - the two linearly coupled families, weights and beliefs.

Every type is an immutable pydantic model; vectors are stored as tuples and
exposed to the services as NumPy arrays.
"""
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    model_validator,
)

from lcg.config import settings
from lcg.exceptions import ConfigError

Vector = npt.NDArray[np.float64]

# Aliases used in signatures; all are length-N float vectors.
ActionProfile = Vector
StateVector = Vector
UtilityVector = Vector


class GameFamily(str, Enum):
    """The two basic linearly coupled game types."""
    TYPE_I = "type1"   # u_n = a_n^b_n * prod_{m!=n} (mu_m - tau_m a_m)
    TYPE_II = "type2"  # u_n = a_n^b_n * (mu - sum_m tau_m a_m)


def default_bounds(family: GameFamily, mu: Any, tau: Any) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """
    Smallest box containing every nonnegative-state single-user deviation.

    Type II: a_n in [0, mu / tau_n]; Type I: a_n in [0, mu_n / tau_n].
    """
    tau_arr = np.asarray(tau, dtype=float)
    mu_arr = np.broadcast_to(np.asarray(mu, dtype=float), tau_arr.shape)
    upper = mu_arr / tau_arr
    return tuple(0.0 for _ in upper), tuple(float(x) for x in upper)


class GameSpec(BaseModel):
    """Parametric description of a Type I or Type II game."""

    model_config = ConfigDict(frozen=True)

    family: GameFamily
    beta: tuple[PositiveFloat, ...] = Field(min_length=1)
    tau: tuple[PositiveFloat, ...] = Field(min_length=1)
    mu: Union[PositiveFloat, tuple[PositiveFloat, ...]]
    action_lower: tuple[NonNegativeFloat, ...] = ()
    action_upper: tuple[PositiveFloat, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _fill_default_bounds(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        if data.get("action_lower") and data.get("action_upper"):
            return data
        try:
            family = GameFamily(data["family"])
            lower, upper = default_bounds(family, data["mu"], data["tau"])
        except (KeyError, TypeError, ValueError):
            # Leave it to field validation to report the real problem
            return data
        data = dict(data)
        if not data.get("action_lower"):
            data["action_lower"] = lower
        if not data.get("action_upper"):
            data["action_upper"] = upper
        return data

    @model_validator(mode="after")
    def _check_shapes(self) -> "GameSpec":
        n = len(self.beta)
        for name in ("tau", "action_lower", "action_upper"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n} (length of beta)")

        if self.family is GameFamily.TYPE_II and not isinstance(self.mu, float):
            raise ValueError("mu must be a single positive number for a type2 game")
        if self.family is GameFamily.TYPE_I:
            if isinstance(self.mu, float):
                raise ValueError("mu must be an array of N positive numbers for a type1 game")
            if len(self.mu) != n:
                raise ValueError(f"mu has length {len(self.mu)}, expected {n}")

        for i, (lo, hi) in enumerate(zip(self.action_lower, self.action_upper)):
            if not lo < hi:
                raise ValueError(f"action bounds for user {i + 1} are degenerate: [{lo}, {hi}]")

        if self.family is GameFamily.TYPE_II:
            # The shared state must be positive somewhere in the box
            floor = float(np.dot(self.tau, self.action_lower))
            if floor >= self.mu:
                raise ValueError(
                    f"state mu - sum(tau*a) is non-positive on the whole action box "
                    f"(mu={self.mu}, sum(tau*lower)={floor})"
                )
        return self

    @classmethod
    def type2(cls, beta, tau, mu: float, **bounds) -> "GameSpec":
        return cls(family=GameFamily.TYPE_II, beta=tuple(beta), tau=tuple(tau), mu=mu, **bounds)

    @classmethod
    def type1(cls, beta, tau, mu, **bounds) -> "GameSpec":
        return cls(family=GameFamily.TYPE_I, beta=tuple(beta), tau=tuple(tau), mu=tuple(mu), **bounds)

    @classmethod
    def random_access(cls, n_users: int) -> "GameSpec":
        """Slotted random access: u_n = p_n * prod_{m!=n} (1 - p_m), p in [0, 1]."""
        ones = (1.0,) * n_users
        return cls.type1(beta=ones, tau=ones, mu=ones)

    @classmethod
    def flow_control(cls, beta, mu: float) -> "GameSpec":
        """Flow control over a shared server: u_n = r_n^b_n * (mu - sum r_m)."""
        return cls.type2(beta=beta, tau=(1.0,) * len(beta), mu=mu)

    @property
    def n_users(self) -> int:
        return len(self.beta)

    @property
    def beta_array(self) -> Vector:
        return np.asarray(self.beta, dtype=float)

    @property
    def tau_array(self) -> Vector:
        return np.asarray(self.tau, dtype=float)

    @property
    def mu_array(self) -> Vector:
        """Per-user mu (Type II broadcasts the shared capacity)."""
        return np.broadcast_to(np.asarray(self.mu, dtype=float), (self.n_users,)).copy()

    @property
    def lower_array(self) -> Vector:
        return np.asarray(self.action_lower, dtype=float)

    @property
    def upper_array(self) -> Vector:
        return np.asarray(self.action_upper, dtype=float)

    def require_family(self, family: GameFamily, operation: str) -> None:
        """Raise ConfigError when an operation is called on the wrong family."""
        if self.family is not family:
            raise ConfigError(f"{operation} requires a {family.value} game, got {self.family.value}")


class Weights(BaseModel):
    """Proportional-fairness weights on the simplex."""

    model_config = ConfigDict(frozen=True)

    omega: tuple[NonNegativeFloat, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_simplex(self) -> "Weights":
        total = float(sum(self.omega))
        if abs(total - 1.0) > settings.weights_sum_tolerance:
            raise ValueError(f"weights must sum to 1, got {total:.12g}")
        return self

    @classmethod
    def uniform(cls, n_users: int) -> "Weights":
        return cls(omega=(1.0 / n_users,) * n_users)

    @property
    def array(self) -> Vector:
        return np.asarray(self.omega, dtype=float)

    @property
    def is_interior(self) -> bool:
        return all(w > 0 for w in self.omega)


class BeliefConfig(BaseModel):
    """
    Linear beliefs s~_n(a_n) = s_ref_n - lambda_n (a_n - a_ref_n).

    The slopes drive every steady-state result; the reference points make the
    conjectural-equilibrium definition checkable.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: tuple[PositiveFloat, ...] = Field(alias="lambda", min_length=1)
    s_ref: tuple[float, ...] = ()
    a_ref: tuple[NonNegativeFloat, ...] = ()

    @model_validator(mode="after")
    def _check_lengths(self) -> "BeliefConfig":
        n = len(self.lambda_)
        for name in ("s_ref", "a_ref"):
            size = len(getattr(self, name))
            if size not in (0, n):
                raise ValueError(f"{name} has length {size}, expected {n}")
        return self

    @classmethod
    def from_slopes(cls, slopes) -> "BeliefConfig":
        return cls(lambda_=tuple(float(x) for x in slopes))

    @property
    def lambda_array(self) -> Vector:
        return np.asarray(self.lambda_, dtype=float)

    @property
    def s_ref_array(self) -> Vector:
        return np.asarray(self.s_ref or (0.0,) * len(self.lambda_), dtype=float)

    @property
    def a_ref_array(self) -> Vector:
        return np.asarray(self.a_ref or (0.0,) * len(self.lambda_), dtype=float)


class AssumptionCheck(BaseModel):
    """Verdict for one of the assumptions A1-A4."""

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    worst_residual: float
    detail: str = ""


class ValidationReport(BaseModel):
    """Numeric check of A1-A4 on sampled interior points."""

    model_config = ConfigDict(frozen=True)

    samples: int
    seed: int
    checks: tuple[AssumptionCheck, ...]
    a4_branch: Optional[str] = None

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> AssumptionCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)
