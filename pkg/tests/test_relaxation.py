"""Relaxation solutions, convolution machinery and the structural checks."""
import math

import pytest
from scipy.integrate import quad

from genfrac import (
    ConsistencyError,
    ContourConfig,
    DomainError,
    KernelSpec,
    QuadratureError,
    check_theorem_properties,
    convolve_v,
    fundamental_u,
    impulse_v,
    integral_v,
    ml_fundamental,
    ml_impulse,
    phi_laplace_in_tau,
    phi_total_mass,
    psi_total_mass,
    sample_solutions,
    solve_relaxation,
    subordination_phi,
    subordination_psi,
)

from conftest import geometric_grid, ml_series_oracle, rel_err

CFG = ContourConfig(nodes=48, working_tolerance=1e-9)
TIGHT = ContourConfig(nodes=48, working_tolerance=1e-10)

SINGLE = KernelSpec.single_term(0.5)

# frozen oracle values (series oracle at 60 digits)
U_HALF_1_1 = 0.42758357615580705       # E(1/2, 1; -1)
V_HALF_1_1 = 0.13660600739194928       # E(1/2, 1/2; -1)


class TestFundamental:
    def test_unit_value_at_origin(self):
        for k in (SINGLE, KernelSpec.distributed_uniform()):
            assert fundamental_u(k, 3.0, 0.0, CFG) == 1.0

    def test_single_term_against_oracle(self):
        assert fundamental_u(SINGLE, 1.0, 1.0, TIGHT) == pytest.approx(U_HALF_1_1, rel=1e-9)

    def test_near_classical_order_close_to_exponential(self):
        # continuity in the order: alpha = 0.999 stays within 1e-2 of exp
        k = KernelSpec.single_term(0.999)
        value = fundamental_u(k, 1.0, 1.0, CFG)
        assert value == pytest.approx(ml_fundamental(0.999, 1.0, 1.0), rel=1e-8)
        assert abs(value - math.exp(-1.0)) < 1e-2

    def test_in_unit_interval(self, corpus_kernels):
        for k in corpus_kernels.values():
            for lam in (0.1, 1.0, 100.0):
                for t in (1e-3, 1.0, 1e3):
                    value = fundamental_u(k, lam, t, CFG)
                    assert 0.0 < value < 1.0

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            fundamental_u(SINGLE, 0.0, 1.0, CFG)
        with pytest.raises(DomainError):
            fundamental_u(SINGLE, 1.0, -1.0, CFG)


class TestImpulse:
    def test_single_term_against_oracle(self):
        assert impulse_v(SINGLE, 1.0, 1.0, TIGHT) == pytest.approx(V_HALF_1_1, rel=1e-9)

    def test_tiny_rate_limit(self):
        # v -> t**(alpha-1)/Gamma(alpha) as the rate vanishes
        value = impulse_v(SINGLE, 1e-10, 1.0, CFG)
        assert value == pytest.approx(1.0 / math.gamma(0.5), rel=1e-7)

    def test_multi_term_with_one_entry_matches_single(self):
        k = KernelSpec.multi_term([(1.0, 0.5)])
        for t in (0.1, 1.0, 10.0):
            assert impulse_v(k, 2.0, t, CFG) == pytest.approx(
                impulse_v(SINGLE, 2.0, t, CFG), rel=1e-12
            )
            assert impulse_v(k, 2.0, t, CFG) == pytest.approx(
                ml_impulse(0.5, 2.0, t), rel=1e-8
            )

    def test_small_time_cutoff(self):
        with pytest.raises(DomainError):
            impulse_v(SINGLE, 1.0, 1e-7, CFG)


class TestIntegral:
    def test_value_from_identity(self):
        assert integral_v(SINGLE, 1.0, 1.0, TIGHT) == pytest.approx(
            1.0 - U_HALF_1_1, rel=1e-9
        )

    def test_vanishes_at_small_horizon(self):
        assert integral_v(SINGLE, 1.0, 1e-9, CFG) == pytest.approx(0.0, abs=1e-4)

    def test_large_rate_upper_bound(self):
        assert integral_v(SINGLE, 100.0, 1.0, CFG) < 0.01

    def test_identity_plumbing_exact(self, corpus_kernels):
        for k in corpus_kernels.values():
            for lam in (0.5, 10.0):
                lhs = lam * integral_v(k, lam, 2.0, CFG) + fundamental_u(k, lam, 2.0, CFG)
                assert lhs == pytest.approx(1.0, abs=1e-10)


class TestConvolution:
    def test_constant_forcing_equals_integral(self):
        conv = convolve_v(SINGLE, 1.0, lambda t: 1.0, [1.0], CFG)
        assert conv[0] == pytest.approx(integral_v(SINGLE, 1.0, 1.0, CFG), rel=1e-8)

    def test_polynomial_forcing_against_quadrature_oracle(self):
        # independent oracle: adaptive quadrature of the closed-form kernel
        lam, t_end = 2.0, 0.8
        conv = convolve_v(SINGLE, lam, lambda t: t * t, [t_end], CFG, rel_tol=1e-8)
        oracle = quad(lambda s: ml_impulse(0.5, lam, s) * (t_end - s) ** 2,
                      0.0, t_end, epsabs=1e-13, limit=200)[0]
        assert conv[0] == pytest.approx(oracle, rel=1e-7)

    def test_multiple_targets_shared_mesh(self):
        targets = [0.25, 0.5, 1.0]
        conv = convolve_v(SINGLE, 1.0, lambda t: 1.0, targets, CFG)
        for t, value in zip(targets, conv):
            assert value == pytest.approx(integral_v(SINGLE, 1.0, t, CFG), rel=1e-7)

    def test_rejects_nonpositive_targets(self):
        with pytest.raises(DomainError):
            convolve_v(SINGLE, 1.0, lambda t: 1.0, [0.0, 1.0], CFG)


class TestSampling:
    def test_monotone_structure(self, corpus_kernels):
        grid = geometric_grid(1e-3, 1e2, 24)
        for k in corpus_kernels.values():
            sol = sample_solutions(k, 2.0, grid, CFG)
            assert all(0.0 < u < 1.0 for u in sol.u_values)
            assert all(v > 0.0 for v in sol.v_values)
            assert all(b < a for a, b in zip(sol.u_values, sol.u_values[1:]))
            assert all(b <= a * (1 + 1e-9) for a, b in
                       zip(sol.v_values, sol.v_values[1:]))

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            sample_solutions(SINGLE, 1.0, [0.5, 0.5], CFG)
        with pytest.raises(DomainError):
            sample_solutions(SINGLE, 1.0, [1e-8, 1.0], CFG)


class TestSolve:
    def test_zero_forcing_returns_scaled_fundamental(self):
        grid = [0.1, 1.0, 5.0]
        sol = solve_relaxation(SINGLE, 1.0, 0.7, None, grid, CFG)
        for s_val, u_val in zip(sol.solution_values, sol.u_values):
            assert s_val == pytest.approx(0.7 * u_val, rel=1e-14)

    def test_constant_unit_forcing_matches_integral(self):
        sol = solve_relaxation(SINGLE, 1.0, 0.0, lambda t: 1.0, [1.0], CFG)
        assert sol.solution_values[0] == pytest.approx(
            integral_v(SINGLE, 1.0, 1.0, CFG), rel=1e-7
        )

    def test_rate_forcing_saturates_to_one(self):
        # forcing f = lam drives the solution to 1 - u(t), approaching 1;
        # with alpha = 0.8 and lam = 2 the decay passes 1e-2 by t = 50
        k = KernelSpec.single_term(0.8)
        sol = solve_relaxation(k, 2.0, 0.0, lambda t: 2.0, [50.0], CFG)
        expected = 1.0 - ml_fundamental(0.8, 2.0, 50.0)
        assert sol.solution_values[0] == pytest.approx(expected, rel=1e-6)
        assert abs(sol.solution_values[0] - 1.0) < 1e-2

    def test_combined_initial_value_and_forcing(self):
        lam = 2.0
        sol = solve_relaxation(SINGLE, lam, 1.0, lambda t: lam, [0.5, 2.0], CFG)
        # a=1 with f = lam gives exactly u + (1 - u) = 1 at every time
        for value in sol.solution_values:
            assert value == pytest.approx(1.0, rel=1e-7)


class TestSubordination:
    def test_phi_nonnegative_samples(self, corpus_kernels):
        for k in corpus_kernels.values():
            for tau in (0.01, 0.3, 1.0):
                assert subordination_phi(k, 1.0, tau, CFG) >= -1e-8

    def test_phi_mass_is_one(self, corpus_kernels):
        for k in corpus_kernels.values():
            assert phi_total_mass(k, 1.0, CFG) == pytest.approx(1.0, abs=1e-6)

    def test_phi_laplace_reconstructs_decay(self, corpus_kernels):
        for k in corpus_kernels.values():
            for lam in (1.0, 10.0):
                rec = phi_laplace_in_tau(k, 1.0, lam, CFG)
                assert rec == pytest.approx(
                    fundamental_u(k, lam, 1.0, CFG), abs=1e-6
                )

    def test_psi_mass_single_term(self):
        assert psi_total_mass(SINGLE, 0.7, CFG) == pytest.approx(1.0, abs=2e-2)

    def test_psi_mass_heavy_log_tail_refuses(self):
        # distributed-order time tails decay like 1/(t log^2 t): no direct
        # quadrature can see the mass, and the tail fit must say so
        with pytest.raises(QuadratureError):
            psi_total_mass(KernelSpec.distributed_uniform(), 0.7, CFG)

    def test_psi_point_positive(self):
        assert subordination_psi(SINGLE, 0.5, 0.5, CFG) > 0.0

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            subordination_phi(SINGLE, 0.0, 1.0, CFG)
        with pytest.raises(DomainError):
            subordination_phi(SINGLE, 1.0, -1.0, CFG)


class TestTheoremChecks:
    def test_single_term_all_pass(self):
        grid = geometric_grid(0.01, 1.0, 32)
        report = check_theorem_properties(SINGLE, 10.0, 1.0, 1.0, grid, CFG)
        assert report.all_passed, report.failures
        assert report.bounds.pass_lower and report.bounds.pass_upper
        assert 0.0 < report.bounds.lower_C < 1.0

    def test_multi_term_rate_sweep(self):
        k = KernelSpec.multi_term([(1.0, 0.8), (0.5, 0.3)])
        grid = geometric_grid(0.01, 1.0, 32)
        for lam in (1.0, 10.0, 100.0):
            report = check_theorem_properties(k, lam, 1.0, 1.0, grid, CFG)
            assert report.all_passed, (lam, report.failures)

    def test_equal_rates_bound_is_tight(self):
        grid = geometric_grid(0.01, 1.0, 32)
        report = check_theorem_properties(SINGLE, 1.0, 1.0, 1.0, grid, CFG)
        assert report.all_passed
        # lam = lam1 turns the lower bound into an identity
        lam_integral = report.bounds.lam * report.bounds.integral_value
        assert lam_integral == pytest.approx(report.bounds.lower_C, abs=1e-12)

    def test_bound_values_match_oracle(self):
        grid = geometric_grid(0.01, 1.0, 32)
        report = check_theorem_properties(SINGLE, 10.0, 1.0, 1.0, grid, TIGHT)
        oracle = (1.0 - ml_series_oracle(0.5, 1.0, -10.0)) / 10.0
        assert report.bounds.integral_value == pytest.approx(oracle, rel=1e-8)

    def test_requires_32_points(self):
        with pytest.raises(DomainError):
            check_theorem_properties(SINGLE, 1.0, 1.0, 1.0, [0.1, 1.0], CFG)

    def test_rate_ordering_enforced(self):
        grid = geometric_grid(0.01, 1.0, 32)
        with pytest.raises(DomainError):
            check_theorem_properties(SINGLE, 1.0, 2.0, 1.0, grid, CFG)


class TestOracleEquivalenceSweep:
    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_u_and_v_match_series_forms(self, alpha):
        k = KernelSpec.single_term(alpha)
        grid = geometric_grid(1e-2, 1e2, 9)
        for lam in (0.1, 10.0):
            for t in grid:
                u_val = fundamental_u(k, lam, t, TIGHT)
                assert rel_err(u_val, ml_fundamental(alpha, lam, t)) < 1e-8
                v_val = impulse_v(k, lam, t, TIGHT)
                assert rel_err(v_val, ml_impulse(alpha, lam, t)) < 1e-8
