"""Exception hierarchy shared by services and CLI commands."""
from typing import Optional


class GameError(Exception):
    """Base class for every error raised by lcg."""
    pass


class ConfigError(GameError):
    """Raised when a scenario, spec, weight vector or belief is invalid."""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class SolverError(GameError):
    """Raised when a solver cannot produce a valid equilibrium."""
    pass


class OutOfBoundsError(SolverError):
    """Raised when an analytic solution leaves the action box."""

    def __init__(self, what: str, coordinate: int, value: float, lower: float, upper: float):
        self.coordinate = coordinate
        self.value = value
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"{what} leaves the action bounds at user {coordinate + 1}: "
            f"a_{coordinate + 1}={value:.12g} not in [{lower:.12g}, {upper:.12g}]"
        )


class SingularMatrixError(SolverError):
    """Raised when elimination meets a (near-)zero pivot."""

    def __init__(self, pivot: float, detail: str = ""):
        self.pivot = pivot
        message = f"Matrix is singular or near-singular (pivot magnitude {pivot:.3e})"
        super().__init__(f"{message}: {detail}" if detail else message)


class ConsistencyError(SolverError):
    """Raised when two evaluation paths of the same quantity disagree."""
    pass


class OutputError(GameError):
    """Raised when a result file cannot be written."""
    pass
