"""
Game model service - states, utilities and numeric checks of assumptions A1-A4.

u_n(a) = a_n^{beta_n} * s_n(a), where
    Type I:  s_n(a) = prod_{m != n} (mu_m - tau_m a_m)
    Type II: s_n(a) = mu - sum_m tau_m a_m
"""
import logging
from typing import Callable, Optional

import numpy as np

from lcg.config import settings
from lcg.exceptions import ConfigError
from lcg.models.game import (
    ActionProfile,
    AssumptionCheck,
    GameFamily,
    GameSpec,
    StateVector,
    UtilityVector,
    ValidationReport,
    Weights,
)

logger = logging.getLogger(__name__)

StateFunction = Callable[[np.ndarray], np.ndarray]


class GameModel:
    """
    Pure evaluation of the two game families.
    NO I/O, NO side effects - only calculations based on input.
    """

    # Sampling gives up after this many rejected draws per requested sample
    MAX_DRAWS_PER_SAMPLE = 10_000

    def states(self, spec: GameSpec, a: np.ndarray) -> np.ndarray:
        """
        State vector s(a); accepts a single profile (N,) or a batch (..., N).
        """
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != spec.n_users:
            raise ConfigError(
                f"dimension mismatch: action profile has {a.shape[-1]} entries, game has {spec.n_users} users"
            )
        tau = spec.tau_array
        if spec.family is GameFamily.TYPE_II:
            shared = spec.mu - a @ tau
            return np.repeat(shared[..., None], spec.n_users, axis=-1)

        factors = spec.mu_array - tau * a
        # prod over m != n, without dividing by possibly-zero factors
        mask = np.eye(spec.n_users, dtype=bool)
        stacked = np.where(mask, 1.0, factors[..., None, :])
        return stacked.prod(axis=-1)

    def utilities(self, spec: GameSpec, a: np.ndarray, s: np.ndarray) -> np.ndarray:
        """u_n = a_n^{beta_n} * s_n; NaN where a negative action meets a fractional exponent."""
        with np.errstate(invalid="ignore"):
            return np.power(np.asarray(a, dtype=float), spec.beta_array) * s

    def evaluate(self, spec: GameSpec, a: ActionProfile) -> tuple[StateVector, UtilityVector]:
        """
        Evaluate states and utilities at a joint action.

        Negative states are reported as-is (utilities then go negative);
        clamping policy belongs to the dynamics service.

        Args:
            spec: Game description
            a: Joint action, shape (N,)

        Returns:
            tuple: (s, u) state and utility vectors

        Raises:
            ConfigError: If a does not have N entries
        """
        a = np.asarray(a, dtype=float)
        if a.ndim != 1:
            raise ConfigError(f"dimension mismatch: expected a vector of {spec.n_users} actions, got shape {a.shape}")
        s = self.states(spec, a)
        return s, self.utilities(spec, a, s)

    def weighted_log_objective(self, spec: GameSpec, a: ActionProfile, weights: Weights) -> float:
        """Sum of w_n log u_n(a) with 0 log 0 = 0; -inf if a weighted user has u_n <= 0."""
        _, u = self.evaluate(spec, a)
        omega = weights.array
        total = 0.0
        for w_n, u_n in zip(omega, u):
            if w_n == 0.0:
                continue
            if not u_n > 0.0:
                return float("-inf")
            total += w_n * float(np.log(u_n))
        return total

    def in_bounds(self, spec: GameSpec, a: ActionProfile, slack: float = 0.0) -> bool:
        a = np.asarray(a, dtype=float)
        return bool(np.all(a >= spec.lower_array - slack) and np.all(a <= spec.upper_array + slack))

    def sample_interior(self, spec: GameSpec, samples: int, rng: np.random.Generator) -> np.ndarray:
        """
        Draw points uniformly from the action box where every state factor is positive.

        Raises:
            ConfigError: If the region is empty (no accepted draw)
        """
        lower, upper = spec.lower_array, spec.upper_array
        if np.any(upper <= lower):
            raise ConfigError("sampling region empty: degenerate action bounds")

        accepted: list[np.ndarray] = []
        have = 0
        budget = samples * self.MAX_DRAWS_PER_SAMPLE
        batch = max(4 * samples, 256)
        while have < samples and budget > 0:
            draws = rng.uniform(lower, upper, size=(batch, spec.n_users))
            budget -= batch
            keep = draws[self._factors_positive(spec, draws)]
            if keep.size:
                accepted.append(keep)
                have += keep.shape[0]

        if have < samples:
            raise ConfigError(
                f"sampling region empty: only {have} of {samples} draws had positive state factors"
            )
        return np.concatenate(accepted)[:samples]

    def _factors_positive(self, spec: GameSpec, points: np.ndarray) -> np.ndarray:
        if spec.family is GameFamily.TYPE_II:
            return spec.mu - points @ spec.tau_array > 0.0
        return np.all(spec.mu_array - spec.tau_array * points > 0.0, axis=-1)

    def validate_assumptions(
        self,
        spec: GameSpec,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        state_fn: Optional[StateFunction] = None,
    ) -> ValidationReport:
        """
        Numerically check assumptions A1-A4 on random interior points.

        Derivatives use central differences with step `fd_step`; curvature and
        affinity use second differences with step `curvature_step`.

        Args:
            spec: Game description (defines the sampling box and default states)
            samples: Number of interior points (defaults to settings)
            seed: RNG seed (defaults to settings)
            state_fn: Optional vectorised state function a (k, N) -> s (k, N)
                replacing the family formula, for user-extended games

        Returns:
            ValidationReport: per-assumption verdicts with worst residuals
        """
        samples = samples if samples is not None else settings.validation_samples
        seed = seed if seed is not None else settings.validation_seed
        if samples < 1:
            raise ConfigError("samples must be a positive integer", field_path="samples")

        rng = np.random.default_rng(seed)
        points = self.sample_interior(spec, samples, rng)
        state = state_fn or (lambda x: self.states(spec, x))
        n = spec.n_users
        h = settings.fd_step
        big_h = settings.curvature_step
        off = ~np.eye(n, dtype=bool)

        a1_worst = 0.0
        a2_worst = 0.0
        a2_detail = ""
        a3_worst = 0.0
        a4_worst = 0.0
        own_zero_worst = 0.0
        own_shared_worst = 0.0

        for x in points:
            s = np.asarray(state(x[None, :]), dtype=float)[0]
            d1 = self._jacobian(state, x, h)

            # A1: nonnegative states
            a1_worst = max(a1_worst, float(max(0.0, -s.min())))

            # A2: strictly decreasing in others, non-increasing in own, linear in each
            scale = np.maximum(np.abs(s), 1.0)
            if n > 1:
                sign_violation = float(np.max(np.where(off, d1, -np.inf)))
                if sign_violation >= 0.0:
                    a2_worst = max(a2_worst, sign_violation + 1.0)
                    a2_detail = "a state is not strictly decreasing in another user's action"
            own_increase = float(np.max(np.diag(d1) / scale))
            if own_increase > settings.ratio_tolerance:
                a2_worst = max(a2_worst, own_increase)
                a2_detail = "a state increases in the user's own action"
            curvature = self._curvature(state, x, big_h) / scale[:, None]
            worst_curvature = float(curvature.max())
            if worst_curvature > settings.curvature_tolerance:
                a2_detail = "a state is not linear in a single action"
            a2_worst = max(a2_worst, worst_curvature)

            if n == 1:
                continue

            # A3: s_n / s'_nm affine for n != m
            a3_worst = max(a3_worst, self._affinity_residual(state, x, d1, s, h, big_h, off))

            # A4: s'_nm / s_n agrees across n != m; own ratio is zero or shared
            ratios = d1 / s[:, None]
            for m in range(n):
                others = np.delete(ratios[:, m], m)
                shared = float(others.mean())
                ref = max(abs(shared), np.finfo(float).tiny)
                a4_worst = max(a4_worst, float((others.max() - others.min()) / ref))
                own = float(ratios[m, m])
                own_zero_worst = max(own_zero_worst, abs(own) / ref)
                own_shared_worst = max(own_shared_worst, abs(own - shared) / ref)

        tol = settings.ratio_tolerance
        checks = [
            AssumptionCheck(name="A1", passed=a1_worst == 0.0, worst_residual=a1_worst,
                            detail="" if a1_worst == 0.0 else "negative state at an interior point"),
            AssumptionCheck(name="A2", passed=a2_worst <= settings.curvature_tolerance and not a2_detail,
                            worst_residual=a2_worst, detail=a2_detail),
            AssumptionCheck(name="A3", passed=a3_worst <= settings.affine_tolerance, worst_residual=a3_worst,
                            detail="" if a3_worst <= settings.affine_tolerance else "s_n / s'_nm is not affine"),
        ]

        if n == 1:
            branch = "vacuous"
            a4_passed = True
            a4_residual = 0.0
        elif own_zero_worst <= tol:
            branch, a4_residual = "own-zero", a4_worst
            a4_passed = a4_worst <= tol
        elif own_shared_worst <= tol:
            branch, a4_residual = "shared", max(a4_worst, own_shared_worst)
            a4_passed = a4_worst <= tol
        else:
            branch = None
            a4_residual = max(a4_worst, min(own_zero_worst, own_shared_worst))
            a4_passed = False
        checks.append(AssumptionCheck(
            name="A4",
            passed=a4_passed,
            worst_residual=a4_residual,
            detail=f"branch: {branch}" if branch else "own-action ratio is neither zero nor shared",
        ))

        report = ValidationReport(samples=samples, seed=seed, checks=tuple(checks), a4_branch=branch)
        logger.info(
            f"Assumption check ({spec.family.value}, N={n}, samples={samples}): "
            + ", ".join(f"{c.name}={'pass' if c.passed else 'FAIL'}" for c in checks)
        )
        return report

    @staticmethod
    def _jacobian(state: StateFunction, x: np.ndarray, h: float) -> np.ndarray:
        """Central-difference matrix d1[n, m] = ds_n / da_m."""
        steps = np.eye(x.size) * h
        plus = np.asarray(state(x + steps), dtype=float)
        minus = np.asarray(state(x - steps), dtype=float)
        # row m of plus/minus is the perturbation of a_m
        return ((plus - minus) / (2.0 * h)).T

    @staticmethod
    def _curvature(state: StateFunction, x: np.ndarray, big_h: float) -> np.ndarray:
        """|second difference| c[n, m] of s_n along a_m."""
        steps = np.eye(x.size) * big_h
        plus = np.asarray(state(x + steps), dtype=float)
        minus = np.asarray(state(x - steps), dtype=float)
        centre = np.asarray(state(x[None, :]), dtype=float)[0]
        return np.abs(plus - 2.0 * centre[None, :] + minus).T

    def _affinity_residual(self, state, x, d1, s, h, big_h, off) -> float:
        """Worst relative second difference of g_nm = s_n / s'_nm along every coordinate."""
        with np.errstate(divide="ignore", invalid="ignore"):
            g0 = np.where(off, s[:, None] / d1, 0.0)
        worst = 0.0
        for k in range(x.size):
            shift = np.zeros_like(x)
            shift[k] = big_h
            g = []
            for point in (x + shift, x - shift):
                s_k = np.asarray(state(point[None, :]), dtype=float)[0]
                d1_k = self._jacobian(state, point, h)
                with np.errstate(divide="ignore", invalid="ignore"):
                    g.append(np.where(off, s_k[:, None] / d1_k, 0.0))
            second = np.abs(g[0] - 2.0 * g0 + g[1]) / np.maximum(np.abs(g0), 1.0)
            worst = max(worst, float(np.nanmax(np.where(off, second, 0.0))))
        return worst


# Singleton instance
game_model = GameModel()
