"""
Equilibria service - Nash equilibria, Pareto-boundary points and the price of anarchy.

Type II closed forms:
    a_n^NE = beta_n mu / (tau_n (1 + sum beta))
    a_n^PB = w_n beta_n mu / (tau_n (1 + sum w beta))
Each closed form is checked against its first-order linear system.
"""
import logging
from typing import Optional

import numpy as np

from lcg.config import settings
from lcg.exceptions import ConfigError, ConsistencyError, OutOfBoundsError
from lcg.models.game import ActionProfile, GameFamily, GameSpec, Weights
from lcg.models.results import EquilibriumKind, EquilibriumResult, PoAReport
from lcg.services.game_model import game_model
from lcg.services.numerics import LinearSystem, numerics_service

logger = logging.getLogger(__name__)


class EquilibriumSolver:
    """
    Nash and Pareto solvers for both game families.
    NO I/O, NO side effects - only calculations based on input.
    """

    def check_weights(self, spec: GameSpec, weights: Weights, interior: bool = False) -> np.ndarray:
        omega = weights.array
        if omega.shape != (spec.n_users,):
            raise ConfigError(f"has {omega.size} entries, expected {spec.n_users}", field_path="weights")
        if interior:
            zero = np.flatnonzero(omega == 0.0)
            if zero.size:
                raise ConfigError(
                    f"weight of user {zero[0] + 1} is zero; exclude that user from the game instead",
                    field_path="weights",
                )
        return omega

    def check_bounds(self, spec: GameSpec, a: ActionProfile, what: str) -> None:
        """Raise OutOfBoundsError naming the first coordinate outside the action box."""
        slack = settings.bounds_slack
        lower, upper = spec.lower_array, spec.upper_array
        for n, value in enumerate(a):
            if not lower[n] - slack <= value <= upper[n] + slack:
                error = OutOfBoundsError(what, n, float(value), float(lower[n]), float(upper[n]))
                logger.warning(str(error))
                raise error

    def system_residual(self, system: LinearSystem, a: ActionProfile) -> float:
        return float(np.max(np.abs(system.matrix @ a - system.rhs)))

    def build_result(
        self,
        spec: GameSpec,
        kind: EquilibriumKind,
        a: ActionProfile,
        residual: float,
        weights: Optional[Weights] = None,
    ) -> EquilibriumResult:
        """Evaluate the profile and package it, enforcing the residual tolerance."""
        if residual > settings.residual_tolerance:
            logger.warning(f"{kind.value} first-order residual {residual:.3e} above tolerance")
            raise ConsistencyError(
                f"{kind.value} point violates its first-order conditions (residual {residual:.3e})"
            )
        s, u = game_model.evaluate(spec, a)
        objective = game_model.weighted_log_objective(spec, a, weights) if weights is not None else None
        return EquilibriumResult(
            kind=kind,
            actions=tuple(float(x) for x in a),
            utilities=tuple(float(x) for x in u),
            states=tuple(float(x) for x in s),
            weights_used=weights,
            residual=residual,
            objective=objective,
        )

    # -----------------------------------------------------------------------
    # Linear systems
    # -----------------------------------------------------------------------

    def nash_linear_system(self, spec: GameSpec) -> LinearSystem:
        """(1 + beta_n) tau_n a_n + beta_n sum_{m != n} tau_m a_m = beta_n mu."""
        spec.require_family(GameFamily.TYPE_II, "nash_linear_system")
        beta, tau = spec.beta_array, spec.tau_array
        return LinearSystem(np.outer(beta, tau) + np.diag(tau), beta * spec.mu)

    def pareto_linear_system(self, spec: GameSpec, weights: Weights) -> LinearSystem:
        """Same as the Nash system with w_n beta_n in place of beta_n."""
        spec.require_family(GameFamily.TYPE_II, "pareto_linear_system")
        wb = self.check_weights(spec, weights) * spec.beta_array
        tau = spec.tau_array
        return LinearSystem(np.outer(wb, tau) + np.diag(tau), wb * spec.mu)

    def pareto_type1_system(self, spec: GameSpec, weights: Weights) -> LinearSystem:
        """
        Type I weighted first-order conditions (own factor absent from own state):
            tau_m (1 - w_m + w_m beta_m) a_m = w_m beta_m mu_m
        """
        spec.require_family(GameFamily.TYPE_I, "pareto_type1_system")
        omega = self.check_weights(spec, weights)
        beta, tau = spec.beta_array, spec.tau_array
        return LinearSystem(np.diag(tau * (1.0 - omega + omega * beta)), omega * beta * spec.mu_array)

    # -----------------------------------------------------------------------
    # Nash equilibria
    # -----------------------------------------------------------------------

    def nash_type2(self, spec: GameSpec) -> EquilibriumResult:
        """
        Closed-form Nash equilibrium of a Type II game.

        Raises:
            OutOfBoundsError: If the analytic NE leaves the action box
        """
        spec.require_family(GameFamily.TYPE_II, "nash_type2")
        beta, tau = spec.beta_array, spec.tau_array
        a = beta * spec.mu / (tau * (1.0 + beta.sum()))
        self.check_bounds(spec, a, "Nash equilibrium")
        residual = self.system_residual(self.nash_linear_system(spec), a)
        result = self.build_result(spec, EquilibriumKind.NASH, a, residual)
        logger.info(f"Type II NE: a={np.round(a, 6).tolist()} residual={residual:.2e}")
        return result

    def nash_type1(self, spec: GameSpec) -> EquilibriumResult:
        """Trivial Type I NE: own utility increases in own action, so every user plays its upper bound."""
        spec.require_family(GameFamily.TYPE_I, "nash_type1")
        a = spec.upper_array
        result = self.build_result(spec, EquilibriumKind.NASH, a, 0.0)
        logger.info(f"Type I NE at the upper bounds: a={a.tolist()}")
        return result

    # -----------------------------------------------------------------------
    # Pareto-boundary points
    # -----------------------------------------------------------------------

    def pareto_type2(self, spec: GameSpec, weights: Weights) -> EquilibriumResult:
        """
        Closed-form maximizer of sum w_n log u_n for a Type II game.

        A zero weight gives a_n = 0 and u_n = 0; the objective uses 0 log 0 = 0.
        """
        spec.require_family(GameFamily.TYPE_II, "pareto_type2")
        omega = self.check_weights(spec, weights)
        wb = omega * spec.beta_array
        a = wb * spec.mu / (spec.tau_array * (1.0 + wb.sum()))
        self.check_bounds(spec, a, "Pareto point")
        residual = self.system_residual(self.pareto_linear_system(spec, weights), a)
        result = self.build_result(spec, EquilibriumKind.PARETO_POINT, a, residual, weights)
        logger.info(f"Type II Pareto point: a={np.round(a, 6).tolist()} objective={result.objective:.6g}")
        return result

    def pareto_type1(self, spec: GameSpec, weights: Weights) -> EquilibriumResult:
        """
        Pareto point of a Type I game from its first-order linear system.

        Raises:
            ConfigError: If some weight is zero
            SingularMatrixError: If the system cannot be solved
            OutOfBoundsError: If the solution leaves the action box
        """
        spec.require_family(GameFamily.TYPE_I, "pareto_type1")
        self.check_weights(spec, weights, interior=True)
        system = self.pareto_type1_system(spec, weights)
        a = numerics_service.solve_linear(system)
        self.check_bounds(spec, a, "Pareto point")
        result = self.build_result(
            spec, EquilibriumKind.PARETO_POINT, a, self.system_residual(system, a), weights
        )
        logger.info(f"Type I Pareto point: a={np.round(a, 6).tolist()}")
        return result

    def nash(self, spec: GameSpec) -> EquilibriumResult:
        """Family dispatch for the Nash equilibrium."""
        return self.nash_type2(spec) if spec.family is GameFamily.TYPE_II else self.nash_type1(spec)

    def pareto(self, spec: GameSpec, weights: Weights) -> EquilibriumResult:
        """Family dispatch for the Pareto-boundary point."""
        if spec.family is GameFamily.TYPE_II:
            return self.pareto_type2(spec, weights)
        return self.pareto_type1(spec, weights)

    # -----------------------------------------------------------------------
    # Price of anarchy
    # -----------------------------------------------------------------------

    def poa_closed_form(self, spec: GameSpec, weights: Weights) -> float:
        omega = self.check_weights(spec, weights, interior=True)
        beta = spec.beta_array
        pareto_sum = 1.0 + float(np.dot(omega, beta))
        nash_sum = 1.0 + float(beta.sum())
        return float(
            np.sum(omega * beta * np.log(pareto_sum / (omega * nash_sum))) + np.log(pareto_sum / nash_sum)
        )

    def poa_lower_bound(self, spec: GameSpec, weights: Weights) -> float:
        omega = self.check_weights(spec, weights, interior=True)
        beta = spec.beta_array
        pareto_sum = 1.0 + float(np.dot(omega, beta))
        return pareto_sum * float(
            np.log(pareto_sum ** 2 / ((1.0 + float(np.dot(omega ** 2, beta))) * (1.0 + float(beta.sum()))))
        )

    def price_of_anarchy(self, spec: GameSpec, weights: Weights) -> PoAReport:
        """
        Weighted log-utility gap between the Nash equilibrium and the Pareto point.

        The gap is computed in closed form and from evaluated utilities; the two
        must agree.

        Raises:
            ConfigError: If some weight is zero
            ConsistencyError: If the two evaluation paths disagree
        """
        spec.require_family(GameFamily.TYPE_II, "price_of_anarchy")
        omega = self.check_weights(spec, weights, interior=True)
        gap = self.poa_closed_form(spec, weights)

        ne = self.nash_type2(spec)
        pb = self.pareto_type2(spec, weights)
        gap_evaluated = float(np.sum(omega * np.log(ne.utilities_array / pb.utilities_array)))
        if abs(gap - gap_evaluated) > settings.gap_agreement_tolerance:
            logger.warning(f"PoA paths disagree: closed form {gap:.12g}, evaluated {gap_evaluated:.12g}")
            raise ConsistencyError(
                f"price of anarchy closed form {gap:.12g} disagrees with evaluated gap {gap_evaluated:.12g}"
            )

        report = PoAReport(
            gap=gap,
            gap_evaluated=gap_evaluated,
            lower_bound=self.poa_lower_bound(spec, weights),
            weights_used=weights,
        )
        logger.info(f"PoA gap={report.gap:.6g} lower_bound={report.lower_bound:.6g}")
        return report


# Singleton instance
equilibrium_solver = EquilibriumSolver()
