"""
Dynamics service - best-response and Jacobi belief dynamics for Type II games.

Both rules update all users simultaneously from the previous iterate:
    B_n(a) = beta_n (mu - sum_{m != n} tau_m a_m) / (lambda_n (1 + beta_n))
             + beta_n (lambda_n - tau_n) a_n / (lambda_n (1 + beta_n))
    Jacobi: a <- a + epsilon (B(a) - a)
"""
import logging
from typing import Optional

import numpy as np

from lcg.exceptions import ConfigError
from lcg.models.game import ActionProfile, GameFamily, GameSpec
from lcg.models.results import (
    DynamicsConfig,
    Outcome,
    SpectrumResult,
    StabilityReport,
    Trajectory,
    UpdateRule,
)
from lcg.services.game_model import game_model
from lcg.services.numerics import Slopes, numerics_service

logger = logging.getLogger(__name__)


class DynamicsService:
    """
    Iterated belief dynamics and their spectral convergence verdicts.
    NO I/O - trajectories are returned as data.
    """

    def best_response_map(
        self, spec: GameSpec, lam: Slopes, a_prev: ActionProfile, clamp: bool = False
    ) -> ActionProfile:
        """One simultaneous best-response step; optionally projected onto the action box."""
        spec.require_family(GameFamily.TYPE_II, "best_response_map")
        slopes = numerics_service.resolve_slopes(spec, lam)
        a_next = self._best_response(spec, slopes, self._profile(spec, a_prev))
        if clamp:
            a_next = np.clip(a_next, spec.lower_array, spec.upper_array)
        return a_next

    def jacobi_map(
        self, spec: GameSpec, lam: Slopes, a_prev: ActionProfile, epsilon: float, clamp: bool = False
    ) -> ActionProfile:
        """One damped step a + epsilon (B(a) - a); optionally projected onto the action box."""
        spec.require_family(GameFamily.TYPE_II, "jacobi_map")
        if not epsilon > 0.0:
            raise ConfigError("stepsize must be positive", field_path="dynamics.epsilon")
        a = self._profile(spec, a_prev)
        a_next = a + epsilon * (self._best_response(spec, numerics_service.resolve_slopes(spec, lam), a) - a)
        if clamp:
            a_next = np.clip(a_next, spec.lower_array, spec.upper_array)
        return a_next

    def run_dynamics(self, spec: GameSpec, lam: Slopes, cfg: DynamicsConfig) -> Trajectory:
        """
        Iterate the configured update rule from cfg.initial.

        Stops with CONVERGED when the inf-norm step falls below cfg.tol and, for a
        contracting iteration, the remaining distance estimated from the contraction
        rate is below cfg.tol as well. DIVERGED when the iterate leaves the divergence
        threshold, MAX_ITERS_REACHED otherwise. Outcomes are data; nothing is raised
        for a non-converging run.
        """
        spec.require_family(GameFamily.TYPE_II, "run_dynamics")
        slopes = numerics_service.resolve_slopes(spec, lam)
        a = self._profile(spec, cfg.initial)
        jacobi = cfg.rule is UpdateRule.JACOBI
        lower, upper = spec.lower_array, spec.upper_array
        rate = self.iteration_spectrum(spec, slopes, cfg).spectral_radius

        iterates = [a]
        outcome = Outcome.MAX_ITERS_REACHED
        prev_step: Optional[float] = None
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(cfg.max_iters):
                b = self._best_response(spec, slopes, a)
                a_next = a + cfg.epsilon * (b - a) if jacobi else b
                if cfg.clamp:
                    a_next = np.clip(a_next, lower, upper)
                iterates.append(a_next)

                if not np.all(np.isfinite(a_next)) or float(np.max(np.abs(a_next))) > cfg.divergence_threshold:
                    outcome = Outcome.DIVERGED
                    break
                step = float(np.max(np.abs(a_next - a)))
                if step < cfg.tol and self._settled(step, prev_step, rate, cfg.tol):
                    outcome = Outcome.CONVERGED
                    break
                prev_step = step
                a = a_next

        actions = np.vstack(iterates)
        with np.errstate(over="ignore", invalid="ignore"):
            states = game_model.states(spec, actions)
            utilities = game_model.utilities(spec, actions, states)
        trajectory = Trajectory(actions=actions, states=states, utilities=utilities, outcome=outcome, rule=cfg.rule)
        logger.info(
            f"{cfg.rule.value} dynamics: {outcome.value} after {trajectory.iterations} iterations, "
            f"final a={np.round(trajectory.final_actions, 6).tolist()}"
        )
        return trajectory

    def iteration_spectrum(self, spec: GameSpec, lam: Slopes, cfg: DynamicsConfig) -> SpectrumResult:
        """Spectrum of the linear map iterated by cfg.rule (shifted for Jacobi)."""
        spectrum = numerics_service.br_jacobian_spectrum(spec, lam)
        if cfg.rule is UpdateRule.JACOBI:
            return self.jacobi_spectrum_shift(spectrum, cfg.epsilon)
        return spectrum

    def stability_analysis(self, spec: GameSpec, lam: Slopes) -> StabilityReport:
        """
        Convergence verdicts from the Jacobian spectrum.

        Best response converges iff sum tau beta / (lambda (1 + 2 beta)) < 1;
        Jacobi converges for 0 < epsilon < 2 / (1 - min eigenvalue).
        """
        spectrum = numerics_service.br_jacobian_spectrum(spec, lam)
        condition = spectrum.q_at_minus_one
        converges = condition < 1.0
        if converges != (spectrum.spectral_radius < 1.0):
            logger.warning(
                f"Borderline stability: condition={condition:.12g}, spectral radius={spectrum.spectral_radius:.12g}"
            )
        report = StabilityReport(
            spectrum=spectrum,
            condition_value=condition,
            br_converges=converges,
            jacobi_epsilon_bound=2.0 / (1.0 - spectrum.min_eigenvalue),
        )
        logger.info(
            f"Stability: condition={condition:.6g} radius={spectrum.spectral_radius:.6g} "
            f"br_converges={converges} jacobi_epsilon_bound={report.jacobi_epsilon_bound:.6g}"
        )
        return report

    def jacobi_spectrum_shift(self, spectrum: SpectrumResult, epsilon: float) -> SpectrumResult:
        """
        Spectrum of the Jacobi iteration: xi -> 1 - epsilon + epsilon xi.

        q_at_minus_one is carried over from the best-response spectrum.
        """
        if not epsilon > 0.0:
            raise ConfigError("stepsize must be positive", field_path="dynamics.epsilon")
        shifted = [1.0 - epsilon + epsilon * xi for xi in spectrum.eigenvalues]
        return SpectrumResult(
            eigenvalues=tuple(shifted),
            spectral_radius=max(abs(x) for x in shifted),
            q_at_minus_one=spectrum.q_at_minus_one,
        )

    @staticmethod
    def _settled(step: float, prev_step: Optional[float], rate: float, tol: float) -> bool:
        """
        Whether a step below tol also leaves less than tol to go.

        The remaining distance of a linear iteration contracting at rate r is at
        most about step * r / (1 - r). The observed step ratio replaces r when it
        is slower; non-contracting maps fall back to the plain step rule.
        """
        if step == 0.0 or rate >= 1.0:
            return True
        if prev_step:
            observed = step / prev_step
            if observed < 1.0:
                rate = max(rate, observed)
        return step * rate / (1.0 - rate) < tol

    @staticmethod
    def _profile(spec: GameSpec, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if a.shape != (spec.n_users,):
            raise ConfigError(f"action profile has {a.size} entries, expected {spec.n_users}")
        return a

    @staticmethod
    def _best_response(spec: GameSpec, lam: np.ndarray, a: np.ndarray) -> np.ndarray:
        beta, tau = spec.beta_array, spec.tau_array
        denom = lam * (1.0 + beta)
        others = float(np.dot(tau, a)) - tau * a
        return beta * (spec.mu - others) / denom + beta * (lam - tau) * a / denom


# Singleton instance
dynamics_service = DynamicsService()
