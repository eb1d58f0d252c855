"""
Conjecture service - linear beliefs and conjectural equilibria of Type II games.

User n believes its state responds to its own action as
    s~_n(a_n) = s_ref_n - lambda_n (a_n - a_ref_n)
and maximizes a_n^{beta_n} s~_n(a_n).
"""
import logging

import numpy as np

from lcg.config import settings
from lcg.exceptions import ConfigError, ConsistencyError
from lcg.models.game import ActionProfile, BeliefConfig, GameFamily, GameSpec, Weights
from lcg.models.results import ConservativenessProfile, EquilibriumKind, EquilibriumResult
from lcg.services.equilibria import equilibrium_solver
from lcg.services.game_model import game_model
from lcg.services.numerics import LinearSystem, Slopes, numerics_service

logger = logging.getLogger(__name__)


class ConjectureService:
    """Beliefs, conjectural equilibria and the quantities derived from them."""

    def believed_state(self, belief: BeliefConfig, n: int, a_n: float) -> float:
        """s~_n(a_n) = s_ref_n - lambda_n (a_n - a_ref_n)."""
        self._check_user(belief, n)
        return float(belief.s_ref_array[n] - belief.lambda_array[n] * (a_n - belief.a_ref_array[n]))

    def conjectured_utility(self, spec: GameSpec, n: int, belief: BeliefConfig, a_n: float) -> float:
        return float(a_n ** spec.beta_array[n]) * self.believed_state(belief, n, a_n)

    def conjectured_best_action(self, spec: GameSpec, n: int, belief: BeliefConfig) -> float:
        """
        Unconstrained maximizer of the conjectured utility:
            beta_n (s_ref_n + lambda_n a_ref_n) / (lambda_n (1 + beta_n))
        The caller clamps to the action bounds.
        """
        spec.require_family(GameFamily.TYPE_II, "conjectured_best_action")
        numerics_service.resolve_slopes(spec, belief)
        self._check_user(belief, n)
        beta = float(spec.beta_array[n])
        lam = float(belief.lambda_array[n])
        return beta * (float(belief.s_ref_array[n]) + lam * float(belief.a_ref_array[n])) / (lam * (1.0 + beta))

    def ce_linear_system(self, spec: GameSpec, lam: Slopes) -> LinearSystem:
        """(lambda_n + beta_n tau_n) a_n + beta_n sum_{m != n} tau_m a_m = beta_n mu."""
        spec.require_family(GameFamily.TYPE_II, "ce_linear_system")
        lam = numerics_service.resolve_slopes(spec, lam)
        beta = spec.beta_array
        return LinearSystem(np.diag(lam) + np.outer(beta, spec.tau_array), beta * spec.mu)

    def ce_closed_form(self, spec: GameSpec, lam: Slopes) -> EquilibriumResult:
        """
        Conjectural equilibrium a_n = beta_n mu / (lambda_n (1 + sum tau beta / lambda)).

        With lambda = tau this is the Nash equilibrium; with lambda_n = tau_n / w_n
        it is the Pareto point for weights w.

        Raises:
            OutOfBoundsError: If the CE leaves the action box
        """
        spec.require_family(GameFamily.TYPE_II, "ce_closed_form")
        slopes = numerics_service.resolve_slopes(spec, lam)
        a = self._ce_actions(spec, slopes)
        equilibrium_solver.check_bounds(spec, a, "Conjectural equilibrium")
        residual = equilibrium_solver.system_residual(self.ce_linear_system(spec, slopes), a)
        result = equilibrium_solver.build_result(spec, EquilibriumKind.CONJECTURAL, a, residual)
        logger.info(f"CE: a={np.round(a, 6).tolist()} residual={residual:.2e}")
        return result

    def beliefs_for_target(self, spec: GameSpec, target: ActionProfile) -> BeliefConfig:
        """
        Beliefs that sustain a positive operating point as a CE.

        lambda_n = beta_n (mu - sum tau a*) / a*_n, with reference points at the target.

        Raises:
            ConfigError: Zero/negative target coordinate or non-positive state
            ConsistencyError: The resulting CE does not reproduce the target
        """
        spec.require_family(GameFamily.TYPE_II, "beliefs_for_target")
        target = np.asarray(target, dtype=float)
        if target.shape != (spec.n_users,):
            raise ConfigError(f"has {target.size} entries, expected {spec.n_users}", field_path="target")
        if np.any(target <= 0.0):
            n = int(np.flatnonzero(target <= 0.0)[0])
            raise ConfigError(f"target action of user {n + 1} must be strictly positive", field_path="target")
        state = spec.mu - float(np.dot(spec.tau_array, target))
        if state <= 0.0:
            raise ConfigError(f"target has non-positive state {state:.12g}", field_path="target")

        slopes = spec.beta_array * state / target
        recovered = self._ce_actions(spec, slopes)
        error = float(np.max(np.abs(recovered - target)))
        if error > 1e-9 * max(1.0, float(np.max(target))):
            raise ConsistencyError(f"designed beliefs reproduce the target only to {error:.3e}")

        logger.debug(f"Beliefs for target {target.tolist()}: lambda={slopes.tolist()}")
        return BeliefConfig(
            lambda_=tuple(float(x) for x in slopes),
            s_ref=(state,) * spec.n_users,
            a_ref=tuple(float(x) for x in target),
        )

    def pareto_beliefs(self, spec: GameSpec, weights: Weights) -> BeliefConfig:
        """lambda_n = tau_n / w_n, the slopes whose CE is the Pareto point for w."""
        omega = equilibrium_solver.check_weights(spec, weights, interior=True)
        return BeliefConfig.from_slopes(spec.tau_array / omega)

    def conservativeness(self, spec: GameSpec, lam: Slopes) -> ConservativenessProfile:
        """c_n = tau_n / lambda_n; a total of one marks a Pareto-optimal CE."""
        c = spec.tau_array / numerics_service.resolve_slopes(spec, lam)
        return ConservativenessProfile(c=tuple(float(x) for x in c), total=float(c.sum()))

    def ce_vs_pareto_gap(self, spec: GameSpec, lam: Slopes, weights: Weights) -> float:
        """
        sum w_n log(u_n(a^CE) / u_n(a^PB)); never positive, zero iff w_n = tau_n / lambda_n.

        Raises:
            ConfigError: If some weight is zero
            ConsistencyError: If closed form and evaluated utilities disagree
        """
        spec.require_family(GameFamily.TYPE_II, "ce_vs_pareto_gap")
        omega = equilibrium_solver.check_weights(spec, weights, interior=True)
        slopes = numerics_service.resolve_slopes(spec, lam)
        beta, tau = spec.beta_array, spec.tau_array
        pareto_sum = 1.0 + float(np.dot(omega, beta))
        belief_sum = 1.0 + float(np.sum(tau * beta / slopes))
        closed = float(
            np.sum(omega * beta * np.log(tau * pareto_sum / (slopes * omega * belief_sum)))
            + np.log(pareto_sum / belief_sum)
        )

        ce = self.ce_closed_form(spec, slopes)
        pb = equilibrium_solver.pareto_type2(spec, weights)
        evaluated = float(np.sum(omega * np.log(ce.utilities_array / pb.utilities_array)))
        if abs(closed - evaluated) > settings.gap_agreement_tolerance:
            logger.warning(f"CE gap paths disagree: closed form {closed:.12g}, evaluated {evaluated:.12g}")
            raise ConsistencyError(f"CE gap closed form {closed:.12g} disagrees with evaluated {evaluated:.12g}")
        return closed

    def fairness_deviation(self, spec: GameSpec, lam: Slopes, other: ActionProfile) -> float:
        """
        sum tau_n (u'_n - u*_n) / (lambda_n u*_n) for the CE u* of lambda and a profile u'.

        Non-positive for every feasible profile when the slopes give a Pareto CE and
        the utility region is convex (unit exponents, for one). Strongly skewed
        exponents can make it positive.
        """
        slopes = numerics_service.resolve_slopes(spec, lam)
        u_star = self.ce_closed_form(spec, slopes).utilities_array
        _, u_other = game_model.evaluate(spec, other)
        return float(np.sum(spec.tau_array * (u_other - u_star) / (slopes * u_star)))

    @staticmethod
    def _check_user(belief: BeliefConfig, n: int) -> None:
        if not 0 <= n < len(belief.lambda_):
            raise ConfigError(f"user index {n} out of range for {len(belief.lambda_)} users")

    @staticmethod
    def _ce_actions(spec: GameSpec, lam: np.ndarray) -> np.ndarray:
        beta = spec.beta_array
        ratio = spec.tau_array / lam
        return beta * spec.mu / (lam * (1.0 + float(np.sum(beta * ratio))))


# Singleton instance
conjecture_service = ConjectureService()
