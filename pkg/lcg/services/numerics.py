"""
Numerics service - small dense linear solves and the structured spectrum
of the best-response Jacobian.

The Jacobian of the best-response map is diag(beta/(1+beta)) minus a rank-one
term, so its eigenvalues are the poles kappa/(1+kappa) of repeated exponents
plus the K level-one crossings of

    q(xi) = sum_n tau_n / (lambda_n * (1 - xi * (1 + beta_n) / beta_n)),

one in each interval left of a pole.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from lcg.config import settings
from lcg.exceptions import ConfigError, ConsistencyError, SingularMatrixError
from lcg.models.game import BeliefConfig, GameFamily, GameSpec, Vector
from lcg.models.results import SpectrumResult

logger = logging.getLogger(__name__)

Slopes = Union[BeliefConfig, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class LinearSystem:
    """Square system matrix @ x = rhs."""
    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        rhs = np.asarray(self.rhs, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError(f"matrix must be square, got shape {matrix.shape}")
        if rhs.shape != (matrix.shape[0],):
            raise ConfigError(f"rhs has shape {rhs.shape}, expected ({matrix.shape[0]},)")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)

    @property
    def size(self) -> int:
        return self.rhs.shape[0]


class NumericsService:
    """
    Linear algebra shared by the equilibrium and dynamics services.
    NO I/O - only calculations based on input.
    """

    def resolve_slopes(self, spec: GameSpec, lam: Slopes) -> Vector:
        """Belief slopes as an array, checked against the game size."""
        values = lam.lambda_array if isinstance(lam, BeliefConfig) else np.asarray(lam, dtype=float)
        if values.shape != (spec.n_users,):
            raise ConfigError(f"has {values.size} entries, expected {spec.n_users}", field_path="lambda")
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise ConfigError("belief slopes must be positive and finite", field_path="lambda")
        return values

    def solve_linear(self, system: LinearSystem) -> Vector:
        """
        Solve a small dense system by Gaussian elimination with partial pivoting.

        Args:
            system: Square system

        Returns:
            Solution vector x

        Raises:
            SingularMatrixError: Zero pivot or condition estimate above the limit
            ConsistencyError: Residual check failed
        """
        a = system.matrix.copy()
        b = system.rhs.copy()
        n = system.size
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if scale == 0.0:
            raise SingularMatrixError(0.0, "zero matrix")

        smallest_pivot = np.inf
        for k in range(n):
            # Bring the largest remaining entry of column k to the diagonal
            p = k + int(np.argmax(np.abs(a[k:, k])))
            pivot = abs(a[p, k])
            smallest_pivot = min(smallest_pivot, pivot)
            if pivot <= settings.pivot_tolerance * scale:
                logger.warning(f"Elimination stopped at column {k}: pivot {pivot:.3e}")
                raise SingularMatrixError(pivot, f"column {k + 1}")
            if p != k:
                a[[k, p]] = a[[p, k]]
                b[[k, p]] = b[[p, k]]
            for i in range(k + 1, n):
                factor = a[i, k] / a[k, k]
                if factor != 0.0:
                    a[i, k:] -= factor * a[k, k:]
                    b[i] -= factor * b[k]

        condition = float(np.linalg.cond(system.matrix))
        if not np.isfinite(condition) or condition > settings.singular_condition_limit:
            raise SingularMatrixError(smallest_pivot, f"condition estimate {condition:.3e}")

        x = np.zeros(n)
        for k in range(n - 1, -1, -1):
            x[k] = (b[k] - np.dot(a[k, k + 1:], x[k + 1:])) / a[k, k]

        residual = float(np.max(np.abs(system.matrix @ x - system.rhs)))
        limit = 1e-9 * (1.0 + float(np.max(np.abs(system.rhs))))
        if residual > limit:
            raise ConsistencyError(f"linear solve residual {residual:.3e} exceeds {limit:.3e}")

        logger.debug(f"Solved {n}x{n} system (cond={condition:.3e}, residual={residual:.3e})")
        return x

    def br_jacobian(self, spec: GameSpec, lam: Slopes) -> np.ndarray:
        """
        Explicit best-response Jacobian (constant in the action profile).

        J_ii = beta_i (lambda_i - tau_i) / (lambda_i (1 + beta_i))
        J_ik = -beta_i tau_k / (lambda_i (1 + beta_i)),  k != i
        """
        spec.require_family(GameFamily.TYPE_II, "br_jacobian")
        lam = self.resolve_slopes(spec, lam)
        beta, tau = spec.beta_array, spec.tau_array
        c = beta / (lam * (1.0 + beta))
        jacobian = -np.outer(c, tau)
        jacobian[np.diag_indices_from(jacobian)] += c * lam
        return jacobian

    def q_function(self, spec: GameSpec, lam: Slopes, xi):
        """q(xi) = sum tau_n / (lambda_n (1 - xi (1 + beta_n) / beta_n)); accepts scalar or array xi."""
        lam = self.resolve_slopes(spec, lam)
        beta, tau = spec.beta_array, spec.tau_array
        xi_arr = np.asarray(xi, dtype=float)
        terms = tau / (lam * (1.0 - xi_arr[..., None] * (1.0 + beta) / beta))
        result = terms.sum(axis=-1)
        return float(result) if np.ndim(result) == 0 else result

    def br_jacobian_spectrum(self, spec: GameSpec, lam: Slopes) -> SpectrumResult:
        """
        All N eigenvalues of the best-response Jacobian from the rational equation q(xi) = 1.

        Args:
            spec: Type II game
            lam: Belief slopes (positive)

        Returns:
            SpectrumResult: eigenvalues in ascending order with multiplicity
        """
        spec.require_family(GameFamily.TYPE_II, "br_jacobian_spectrum")
        lam = self.resolve_slopes(spec, lam)
        beta, tau = spec.beta_array, spec.tau_array
        groups = self._group_exponents(beta, tau / lam)
        poles = [kappa / (1.0 + kappa) for kappa, _, _ in groups]

        def q(xi: float) -> float:
            return sum(w / (1.0 - xi * (1.0 + kappa) / kappa) for kappa, _, w in groups)

        eigenvalues: list[float] = []
        for pole, (_, count, _) in zip(poles, groups):
            eigenvalues.extend([pole] * (count - 1))

        # Leftmost crossing lies below the smallest pole; widen until q < 1
        step = 1.0
        lo = poles[0] - step
        while q(lo) >= 1.0:
            step *= 2.0
            lo = poles[0] - step
        eigenvalues.append(self._bisect_level_one(q, lo, poles[0]))

        for left, right in zip(poles[:-1], poles[1:]):
            eigenvalues.append(self._bisect_level_one(q, left, right))

        eigenvalues.sort()
        q_minus_one = float(np.sum(tau * beta / (lam * (1.0 + 2.0 * beta))))
        radius = max(abs(x) for x in eigenvalues)
        logger.debug(f"Spectrum: {len(groups)} distinct exponents, radius={radius:.6g}, q(-1)={q_minus_one:.6g}")
        return SpectrumResult(
            eigenvalues=tuple(float(x) for x in eigenvalues),
            spectral_radius=float(radius),
            q_at_minus_one=q_minus_one,
        )

    @staticmethod
    def _group_exponents(beta: Vector, weights: Vector) -> list[tuple[float, int, float]]:
        """
        Group equal exponents; returns (kappa, count, sum of tau/lambda) sorted by kappa.
        """
        order = np.argsort(beta, kind="stable")
        groups: list[list] = []
        for idx in order:
            value = float(beta[idx])
            tie = settings.beta_tie_tolerance * max(abs(value), abs(groups[-1][0])) if groups else 0.0
            if groups and abs(value - groups[-1][0]) <= tie:
                groups[-1][1] += 1
                groups[-1][2] += float(weights[idx])
            else:
                groups.append([value, 1, float(weights[idx])])
        return [(kappa, count, weight) for kappa, count, weight in groups]

    @staticmethod
    def _bisect_level_one(q, lo: float, hi: float) -> float:
        """Root of q(xi) = 1 on (lo, hi) where q is increasing; the endpoints are never evaluated."""
        mid = 0.5 * (lo + hi)
        for _ in range(settings.bisection_max_iterations):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            value = q(mid) - 1.0
            if value == 0.0:
                break
            if value < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= settings.bisection_tolerance * max(1.0, abs(mid)) and abs(value) <= 1e-10:
                break
        return mid


# Singleton instance
numerics_service = NumericsService()
