"""
Configuration management for the lcg solver.
Uses Pydantic Settings for type-safe environment variable management.
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Solver and CLI configuration settings."""

    # Logging
    log_level: str = "WARNING"
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Equilibria
    residual_tolerance: float = 1e-8
    bounds_slack: float = 1e-12
    gap_agreement_tolerance: float = 1e-9
    weights_sum_tolerance: float = 1e-9

    # Numerics
    singular_condition_limit: float = 1e12
    pivot_tolerance: float = 1e-14
    beta_tie_tolerance: float = 1e-12
    bisection_tolerance: float = 1e-12
    bisection_max_iterations: int = 200

    # Assumption checks (finite differences)
    fd_step: float = 1e-6
    curvature_step: float = 1e-3
    curvature_tolerance: float = 1e-9
    affine_tolerance: float = 1e-5
    ratio_tolerance: float = 1e-7
    validation_samples: int = 100
    validation_seed: int = 0

    # Dynamics
    dynamics_tol: float = 1e-9
    dynamics_max_iters: int = 100_000
    divergence_threshold: float = 1e9
    dynamics_clamp: bool = True

    # Output
    machine_significant_digits: int = 12
    table_decimals: int = 4
    sweep_workers: int = 4

    model_config = SettingsConfigDict(
        env_prefix="LCG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @property
    def machine_float_format(self) -> str:
        """printf-style format for CSV/JSON-adjacent numeric output."""
        return f"%.{self.machine_significant_digits}g"

    @property
    def table_float_format(self) -> str:
        """printf-style format for human tables."""
        return f"%.{self.table_decimals}f"


# Global settings instance
settings = Settings()
