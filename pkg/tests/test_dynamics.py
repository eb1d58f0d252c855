import numpy as np
import pytest

from lcg.exceptions import ConfigError
from lcg.models.game import GameSpec
from lcg.models.results import DynamicsConfig, Outcome, SpectrumResult, UpdateRule
from lcg.services.conjecture import conjecture_service
from lcg.services.dynamics import dynamics_service
from lcg.services.equilibria import equilibrium_solver
from lcg.services.numerics import numerics_service

from conftest import random_interior_weights, random_type2_spec
from oracles import matrix_eigenvalues


def random_slopes(rng, spec, low=0.5, high=10.0):
    return spec.tau_array * rng.uniform(low, high, size=spec.n_users)


def unclamped(initial, **kwargs) -> DynamicsConfig:
    kwargs.setdefault("max_iters", 100000)
    kwargs.setdefault("tol", 1e-9)
    return DynamicsConfig(initial=tuple(float(x) for x in initial), clamp=False, **kwargs)


def ce_actions(spec, lam) -> np.ndarray:
    return conjecture_service.ce_closed_form(spec, lam).actions_array


class TestMaps:
    def test_best_response_step_at_nash_slopes(self, table_spec):
        a_next = dynamics_service.best_response_map(table_spec, table_spec.tau_array, [1.0, 1.0, 1.0])
        assert a_next == pytest.approx([0.2, 0.25, 0.2])

    def test_best_response_step_at_pareto_slopes(self, table_spec, pareto_slopes):
        a_next = dynamics_service.best_response_map(table_spec, pareto_slopes, [1.0, 1.0, 1.0])
        assert a_next == pytest.approx([10.5 / 22.5, 10.0 / 24.0, 6.5 / 22.5])

    def test_single_user_jumps_to_nash(self):
        spec = GameSpec.type2(beta=[1.0], tau=[1.0], mu=2.0)
        assert dynamics_service.best_response_map(spec, [1.0], [0.3]).tolist() == pytest.approx([1.0])

    def test_ce_is_fixed_point(self, rng):
        for _ in range(50):
            spec = random_type2_spec(rng, int(rng.integers(1, 7)))
            lam = random_slopes(rng, spec)
            a_star = ce_actions(spec, lam)
            assert dynamics_service.best_response_map(spec, lam, a_star) == pytest.approx(a_star, abs=1e-12)
            assert dynamics_service.jacobi_map(spec, lam, a_star, 0.3) == pytest.approx(a_star, abs=1e-12)

    def test_jacobi_is_damped_best_response(self, table_spec, pareto_slopes):
        a = np.array([1.0, 1.0, 1.0])
        b = dynamics_service.best_response_map(table_spec, pareto_slopes, a)
        assert dynamics_service.jacobi_map(table_spec, pareto_slopes, a, 0.25) == pytest.approx(a + 0.25 * (b - a))

    def test_clamp_projects_onto_box(self, table_spec):
        lam = table_spec.tau_array * 0.01
        a_next = dynamics_service.best_response_map(table_spec, lam, [0.0, 0.0, 0.0], clamp=True)
        assert np.all(a_next <= table_spec.upper_array)
        assert a_next == pytest.approx(table_spec.upper_array)

    def test_jacobian_is_state_independent(self, rng):
        h = 1e-3
        for _ in range(20):
            n = int(rng.integers(1, 6))
            spec = random_type2_spec(rng, n)
            lam = random_slopes(rng, spec)
            expected = numerics_service.br_jacobian(spec, lam)
            for _ in range(2):
                a = rng.uniform(spec.lower_array, spec.upper_array)
                base = dynamics_service.best_response_map(spec, lam, a)
                fd = np.column_stack(
                    [(dynamics_service.best_response_map(spec, lam, a + h * e) - base) / h for e in np.eye(n)]
                )
                assert fd == pytest.approx(expected, abs=1e-7)

    def test_bad_arguments(self, table_spec):
        with pytest.raises(ConfigError, match="stepsize"):
            dynamics_service.jacobi_map(table_spec, table_spec.tau_array, [1.0, 1.0, 1.0], 0.0)
        with pytest.raises(ConfigError, match="entries"):
            dynamics_service.best_response_map(table_spec, table_spec.tau_array, [1.0, 1.0])
        with pytest.raises(ConfigError, match="requires a type2 game"):
            dynamics_service.best_response_map(GameSpec.random_access(2), [1.0, 1.0], [0.5, 0.5])


class TestRunDynamics:
    def test_best_response_reaches_pareto_point(self, table_spec, uniform3, pareto_slopes):
        cfg = DynamicsConfig(initial=(0.5, 0.5, 0.5), max_iters=200, tol=1e-3, clamp=True)
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        target = equilibrium_solver.pareto_type2(table_spec, uniform3).actions_array
        assert trajectory.outcome is Outcome.CONVERGED
        assert trajectory.converged
        assert trajectory.rule is UpdateRule.BEST_RESPONSE
        assert trajectory.iterations <= 12
        assert np.max(np.abs(trajectory.final_actions - target)) < 2e-3

    def test_best_response_within_tolerance_by_twelve(self, table_spec, uniform3, pareto_slopes):
        cfg = DynamicsConfig(initial=(0.5, 0.5, 0.5), max_iters=12, tol=1e-12, clamp=True)
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        assert trajectory.outcome is Outcome.MAX_ITERS_REACHED
        assert trajectory.iterations == 12
        hit = trajectory.first_within(equilibrium_solver.pareto_type2(table_spec, uniform3).actions, 1e-3)
        assert hit is not None and hit <= 12

    def test_jacobi_is_slower_but_reaches_same_point(self, table_spec, uniform3, pareto_slopes):
        initial = (0.5, 0.5, 0.5)
        br_cfg = DynamicsConfig(initial=initial, max_iters=200, tol=1e-3)
        br = dynamics_service.run_dynamics(table_spec, pareto_slopes, br_cfg)
        jacobi = dynamics_service.run_dynamics(
            table_spec,
            pareto_slopes,
            DynamicsConfig(rule=UpdateRule.JACOBI, epsilon=0.5, initial=initial, max_iters=200, tol=1e-3),
        )
        assert jacobi.converged
        assert jacobi.iterations > br.iterations

        precise = dynamics_service.run_dynamics(
            table_spec,
            pareto_slopes,
            DynamicsConfig(rule=UpdateRule.JACOBI, epsilon=0.5, initial=initial, max_iters=500, tol=1e-4),
        )
        target = equilibrium_solver.pareto_type2(table_spec, uniform3).actions_array
        assert np.max(np.abs(precise.final_actions - target)) < 1e-3

    def test_single_user_converges_in_two_steps(self):
        spec = GameSpec.type2(beta=[1.0], tau=[1.0], mu=2.0)
        trajectory = dynamics_service.run_dynamics(spec, [1.0], unclamped([0.5]))
        assert trajectory.iterations == 2
        assert trajectory.actions[:, 0].tolist() == [0.5, 1.0, 1.0]

    def test_records_carry_states_and_utilities(self, table_spec, pareto_slopes):
        cfg = unclamped([0.5, 0.5, 0.5], max_iters=5, tol=1e-12)
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        records = list(trajectory.records)
        assert len(records) == 6
        assert records[0].t == 0
        assert records[0].a.tolist() == [0.5, 0.5, 0.5]
        assert records[0].s.tolist() == [4.0, 4.0, 4.0]
        assert records[-1].u == pytest.approx(records[-1].a ** table_spec.beta_array * records[-1].s)

    def test_max_iterations(self, table_spec, pareto_slopes):
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, unclamped([0.5, 0.5, 0.5], max_iters=3))
        assert trajectory.outcome is Outcome.MAX_ITERS_REACHED
        assert trajectory.iterations == 3

    def test_divergence(self, table_spec):
        trajectory = dynamics_service.run_dynamics(table_spec, table_spec.tau_array * 0.1, unclamped([0.5, 0.5, 0.5]))
        assert trajectory.outcome is Outcome.DIVERGED
        assert not trajectory.converged
        assert trajectory.iterations < 100000

    def test_deterministic(self, table_spec, pareto_slopes):
        cfg = unclamped([0.1, 0.2, 0.3], rule=UpdateRule.JACOBI, epsilon=0.7)
        first = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        second = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        assert np.array_equal(first.actions, second.actions)
        assert first.outcome is second.outcome

    def test_initial_profile_checked(self, table_spec, pareto_slopes):
        with pytest.raises(ConfigError, match="entries"):
            dynamics_service.run_dynamics(table_spec, pareto_slopes, unclamped([0.5, 0.5]))

    def test_slow_contraction_ends_near_equilibrium(self, table_spec, pareto_slopes):
        # Jacobi rate 1 - 0.05 (1 - 5/9) ~ 0.978: a step below tol still leaves ~44 tol to go
        tol = 1e-8
        cfg = unclamped([0.5, 0.5, 0.5], rule=UpdateRule.JACOBI, epsilon=0.05, tol=tol)
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, cfg)
        assert trajectory.converged
        error = np.max(np.abs(trajectory.final_actions - ce_actions(table_spec, pareto_slopes)))
        assert error <= 10 * tol

    def test_fast_contraction_stops_with_the_step_rule(self, table_spec, pareto_slopes):
        tol = 1e-8
        trajectory = dynamics_service.run_dynamics(table_spec, pareto_slopes, unclamped([0.5, 0.5, 0.5], tol=tol))
        steps = np.max(np.abs(np.diff(trajectory.actions, axis=0)), axis=1)
        first_small = int(np.argmax(steps < tol)) + 1
        assert trajectory.converged
        assert trajectory.iterations - first_small <= 2
        assert trajectory.final_actions == pytest.approx(ce_actions(table_spec, pareto_slopes), abs=10 * tol)

    def test_iteration_spectrum(self, table_spec, pareto_slopes):
        br = dynamics_service.iteration_spectrum(table_spec, pareto_slopes, unclamped([0.5, 0.5, 0.5]))
        jacobi = dynamics_service.iteration_spectrum(
            table_spec, pareto_slopes, unclamped([0.5, 0.5, 0.5], rule=UpdateRule.JACOBI, epsilon=0.5)
        )
        assert br.spectral_radius == pytest.approx(5 / 9, abs=1e-9)
        assert jacobi.spectral_radius == pytest.approx(7 / 9, abs=1e-9)


class TestStability:
    def test_pareto_slopes(self, table_spec, pareto_slopes):
        report = dynamics_service.stability_analysis(table_spec, pareto_slopes)
        assert report.condition_value == pytest.approx(23 / 72, abs=1e-12)
        assert report.br_converges
        assert report.jacobi_epsilon_bound == pytest.approx(2.0, abs=1e-9)
        assert report.convergence_rate == pytest.approx(5 / 9, abs=1e-9)
        assert report.jacobi_converges(0.5)
        assert not report.jacobi_converges(2.5)

    def test_nash_slopes(self, table_spec):
        report = dynamics_service.stability_analysis(table_spec, table_spec.tau_array)
        assert report.condition_value == pytest.approx(23 / 24, abs=1e-12)
        assert report.br_converges
        assert report.jacobi_epsilon_bound > 1.0

    def test_aggressive_slopes(self, table_spec):
        report = dynamics_service.stability_analysis(table_spec, table_spec.tau_array * 0.1)
        assert report.condition_value == pytest.approx(9.583333333, abs=1e-8)
        assert not report.br_converges
        assert report.jacobi_epsilon_bound < 1.0

    def test_jacobi_rescues_unstable_best_response(self, table_spec):
        lam = table_spec.tau_array * 0.1
        report = dynamics_service.stability_analysis(table_spec, lam)
        epsilon = 0.5 * report.jacobi_epsilon_bound
        cfg = unclamped([0.5, 0.5, 0.5], rule=UpdateRule.JACOBI, epsilon=epsilon)
        trajectory = dynamics_service.run_dynamics(table_spec, lam, cfg)
        assert trajectory.converged
        assert trajectory.final_actions == pytest.approx(ce_actions(table_spec, lam), abs=1e-6)

    def test_spectrum_shift(self, table_spec, pareto_slopes):
        spectrum = numerics_service.br_jacobian_spectrum(table_spec, pareto_slopes)
        shifted = dynamics_service.jacobi_spectrum_shift(spectrum, 0.5)
        assert list(shifted.eigenvalues) == pytest.approx([0.5, 0.7, 1 - 0.5 + 0.5 * 5 / 9], abs=1e-9)
        assert shifted.spectral_radius == pytest.approx(7 / 9, abs=1e-9)
        assert shifted.q_at_minus_one == spectrum.q_at_minus_one

    def test_spectrum_shift_examples(self):
        spectrum = SpectrumResult(eigenvalues=(0.0, 0.6), spectral_radius=0.6, q_at_minus_one=0.5)
        assert dynamics_service.jacobi_spectrum_shift(spectrum, 1.0).eigenvalues == pytest.approx((0.0, 0.6))
        assert dynamics_service.jacobi_spectrum_shift(spectrum, 0.5).eigenvalues == pytest.approx((0.5, 0.8))

        divergent = SpectrumResult(eigenvalues=(-1.5, 0.2), spectral_radius=1.5, q_at_minus_one=1.2)
        shifted = dynamics_service.jacobi_spectrum_shift(divergent, 0.5)
        assert shifted.spectral_radius < 1.0
        assert all(-1.0 < x < 1.0 for x in shifted.eigenvalues)

    def test_spectrum_shift_rejects_bad_stepsize(self, table_spec, pareto_slopes):
        with pytest.raises(ConfigError, match="stepsize"):
            spectrum = numerics_service.br_jacobian_spectrum(table_spec, pareto_slopes)
            dynamics_service.jacobi_spectrum_shift(spectrum, 0.0)

    def test_pareto_beliefs_always_stable(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 7))
            spec = random_type2_spec(rng, n)
            lam = conjecture_service.pareto_beliefs(spec, random_interior_weights(rng, n))
            report = dynamics_service.stability_analysis(spec, lam)
            assert report.condition_value < 0.5
            assert report.br_converges


@pytest.mark.slow
class TestConvergenceProperties:
    def test_condition_predicts_best_response(self, rng):
        tol = 1e-8
        checked = 0
        while checked < 100:
            n = int(rng.integers(2, 7))
            spec = random_type2_spec(rng, n)
            lam = random_slopes(rng, spec)
            report = dynamics_service.stability_analysis(spec, lam)
            if 0.99 < report.condition_value < 1.01:
                continue
            if n <= 4 and np.min(np.diff(np.sort(spec.beta_array))) >= 0.3:
                brute = matrix_eigenvalues(numerics_service.br_jacobian(spec, lam))
                assert list(report.spectrum.eigenvalues) == pytest.approx(brute, abs=1e-8)
            initial = rng.uniform(spec.lower_array, spec.upper_array)
            trajectory = dynamics_service.run_dynamics(spec, lam, unclamped(initial, tol=tol))
            assert trajectory.converged == report.br_converges
            if report.br_converges:
                assert trajectory.final_actions == pytest.approx(ce_actions(spec, lam), abs=10 * tol)
            else:
                assert trajectory.outcome is Outcome.DIVERGED
            checked += 1

    def test_jacobi_stepsize_bound(self, rng):
        tol = 1e-8
        # 35 specs where best response converges, 15 where it diverges
        remaining = {True: 35, False: 15}
        while any(remaining.values()):
            n = int(rng.integers(2, 7))
            spec = random_type2_spec(rng, n)
            lam = random_slopes(rng, spec, low=0.1, high=3.0)
            report = dynamics_service.stability_analysis(spec, lam)
            if 0.99 < report.condition_value < 1.01 or remaining[report.br_converges] == 0:
                continue
            remaining[report.br_converges] -= 1

            bound = report.jacobi_epsilon_bound
            initial = rng.uniform(spec.lower_array, spec.upper_array)
            inside_cfg = unclamped(initial, rule=UpdateRule.JACOBI, epsilon=min(0.9 * bound, 1.0), tol=tol)
            outside_cfg = unclamped(initial, rule=UpdateRule.JACOBI, epsilon=1.1 * bound, tol=tol)
            inside = dynamics_service.run_dynamics(spec, lam, inside_cfg)
            outside = dynamics_service.run_dynamics(spec, lam, outside_cfg)
            assert inside.converged
            assert inside.final_actions == pytest.approx(ce_actions(spec, lam), abs=10 * tol)
            assert outside.outcome is Outcome.DIVERGED

    def test_pareto_beliefs_converge_from_anywhere(self, table_spec, rng):
        for _ in range(50):
            weights = random_interior_weights(rng, 3)
            lam = conjecture_service.pareto_beliefs(table_spec, weights)
            target = equilibrium_solver.pareto_type2(table_spec, weights).actions_array
            spectrum = dynamics_service.stability_analysis(table_spec, lam).spectrum
            assert spectrum.min_eigenvalue == pytest.approx(0.0, abs=1e-9)
            for _ in range(20):
                initial = rng.uniform(table_spec.lower_array, table_spec.upper_array)
                trajectory = dynamics_service.run_dynamics(table_spec, lam, unclamped(initial))
                assert trajectory.converged
                assert trajectory.final_actions == pytest.approx(target, abs=1e-6)
