import numpy as np
import pytest

from covlasso.cd import build_lasso_subproblem, solve_cd
from covlasso.cd import variance_update as cd_variance_update
from covlasso.core import (
    SolverConfig,
    is_positive_definite,
    objective,
    partition_column,
    schur_complement,
)
from covlasso.ecm import (
    cm_criterion,
    column_update,
    e_step_weights,
    ridge_update,
    solve_ecm,
)
from covlasso.ecm import variance_update as ecm_variance_update

from conftest import random_pd, random_sample_cov

TIGHT = SolverConfig(outer_tol=1e-12, max_outer_iters=5000)


class TestEStepWeights:
    def test_simple_ratio(self):
        sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        w = e_step_weights(sigma, 2.0)
        assert w[0, 1] == pytest.approx(4.0)
        assert w[0, 0] == 0.0 and w[1, 1] == 0.0

    def test_zero_penalty(self):
        w = e_step_weights(random_pd(4, 0), 0.0)
        np.testing.assert_array_equal(w, np.zeros((4, 4)))

    def test_floor_active(self):
        sigma = np.eye(2)
        w = e_step_weights(sigma, 1.0, floor=1e-12)
        assert w[0, 1] == pytest.approx(1e12)

    def test_symmetric_nonnegative_finite(self):
        sigma = random_pd(5, 3)
        w = e_step_weights(sigma, 0.7)
        np.testing.assert_array_equal(w, w.T)
        assert np.all(w >= 0) and np.all(np.isfinite(w))

    def test_penalty_matrix(self):
        sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        pen = np.array([[0.0, 3.0], [3.0, 0.0]])
        w = e_step_weights(sigma, pen)
        assert w[0, 1] == pytest.approx(6.0)

    def test_bad_floor(self):
        with pytest.raises(ValueError):
            e_step_weights(np.eye(2), 1.0, floor=0.0)


class TestRidgeUpdate:
    def _sub(self, gram, lin, rho):
        from covlasso.cd import LassoSubproblem

        return LassoSubproblem(np.asarray(gram, float), np.asarray(lin, float),
                               np.full(len(lin), float(rho)))

    def test_identity_case(self):
        beta = ridge_update(self._sub(np.eye(2), [2.0, 0.0], 1.0), np.ones(2))
        np.testing.assert_allclose(beta, [1.0, 0.0])

    def test_unpenalized_is_plain_solve(self):
        gram = random_pd(3, 1, jitter=1.0)
        lin = np.array([0.4, -1.0, 0.2])
        beta = ridge_update(self._sub(gram, lin, 0.0), np.ones(3))
        np.testing.assert_allclose(beta, np.linalg.solve(gram, lin), rtol=1e-12)

    def test_floored_scale_pins_coordinate(self):
        # a scale at the floor gets a huge ridge weight: the coordinate is
        # pinned within |lin| * floor / rho of zero
        s = random_sample_cov(6, 12, 7)
        sigma = random_pd(6, 8)
        part = partition_column(sigma, 5, s)
        sub = build_lasso_subproblem(part, schur_complement(part), 0.3)
        floor = 1e-12
        for j in range(5):
            scales = np.abs(part.sigma12).copy()
            scales[j] = 0.0
            beta = ridge_update(sub, scales, floor)
            assert abs(beta[j]) <= np.linalg.norm(sub.lin) * floor / 0.3

    def test_residual_when_scales_above_floor(self):
        s = random_sample_cov(5, 15, 2)
        sigma = random_pd(5, 3)
        part = partition_column(sigma, 4, s)
        sub = build_lasso_subproblem(part, schur_complement(part), 0.4)
        scales = np.abs(part.sigma12) + 0.05
        beta = ridge_update(sub, scales, 1e-12)
        m = sub.gram + np.diag(sub.penalties / scales)
        assert np.linalg.norm(m @ beta - sub.lin) < 1e-8

    def test_solve_failure_reports_condition(self):
        sub = self._sub(np.array([[1.0, 1.0], [1.0, 1.0]]), [1.0, 0.0], 0.0)
        with pytest.raises(np.linalg.LinAlgError, match="condition"):
            ridge_update(sub, np.ones(2))


class TestCmCriterion:
    def test_improves_at_every_column_step(self):
        # direct evaluation of the surrogate before/after each conditional
        # maximization on a small instance
        s = random_sample_cov(4, 12, 4)
        sigma = s.copy()
        for sweep in range(3):
            weights = e_step_weights(sigma, 0.3)
            snapshot = np.abs(sigma)
            for i in range(4):
                before = cm_criterion(sigma, s, weights, 0.3)
                sigma = column_update(sigma, s, i, 0.3, scale_snapshot=snapshot)
                after = cm_criterion(sigma, s, weights, 0.3)
                assert after >= before - 1e-10

    def test_matches_objective_without_penalty(self):
        sigma = random_pd(3, 5)
        s = random_sample_cov(3, 9, 6)
        w = np.zeros((3, 3))
        assert cm_criterion(sigma, s, w, 0.0) == pytest.approx(-objective(sigma, s, 0.0))


class TestSolveEcm:
    @pytest.mark.parametrize("p", [3, 10])
    def test_unpenalized_recovers_sample_covariance(self, p):
        s = random_sample_cov(p, 2 * p, seed=p + 40)
        result = solve_ecm(s, 0.0, SolverConfig(outer_tol=1e-10))
        assert np.max(np.abs(result.sigma_hat - s)) < 1e-6

    def test_variance_update_is_shared_with_cd(self):
        assert ecm_variance_update is cd_variance_update

    def test_monotone_trace_and_pd_iterates(self):
        s = random_sample_cov(8, 20, 41)
        iterates = []
        result = solve_ecm(s, 0.2, callback=lambda k, m: iterates.append(m))
        trace = np.array(result.objective_trace)
        assert np.all(np.diff(trace) <= 1e-8)
        assert all(is_positive_definite(m) for m in iterates)

    def test_close_to_cd_objective(self):
        s = random_sample_cov(20, 40, 42)
        g_cd = solve_cd(s, 0.2).objective_trace[-1]
        g_ecm = solve_ecm(s, 0.2).objective_trace[-1]
        assert abs(g_cd - g_ecm) < 0.05

    def test_matches_grid_oracle_p2(self):
        from covlasso.oracle import brute_force_minimize

        s = np.array([[1.0, 0.5], [0.5, 1.0]])
        result = solve_ecm(s, 0.1, TIGHT)
        report = brute_force_minimize(s, 0.1)
        assert result.objective_trace[-1] <= report.best_value + 1e-2

    def test_offdiagonals_never_exactly_zero(self):
        s = random_sample_cov(6, 15, 43)
        result = solve_ecm(s, 0.5)
        off = result.sigma_hat[~np.eye(6, dtype=bool)]
        assert np.all(off != 0.0)
        # but the sparsity report can still flag them as zero
        assert result.nonzero_fraction <= 1.0

    def test_diag_init_auto_promoted(self):
        s = random_sample_cov(5, 12, 44)
        result = solve_ecm(s, 0.3, SolverConfig(init="diag"))
        assert result.converged
        assert is_positive_definite(result.sigma_hat)

    def test_custom_zero_offdiag_init_fails_fast(self):
        s = random_sample_cov(4, 10, 45)
        cfg = SolverConfig(init="custom", init_matrix=np.diag(np.diag(s)))
        with pytest.raises(ValueError, match="zero off-diagonal"):
            solve_ecm(s, 0.3, cfg)

    def test_penalty_matrix_constant_equals_scalar_bitwise(self):
        s = random_sample_cov(5, 12, 46)
        r1 = solve_ecm(s, 0.3)
        r2 = solve_ecm(s, np.full((5, 5), 0.3))
        np.testing.assert_array_equal(r1.sigma_hat, r2.sigma_hat)
        assert r1.objective_trace == r2.objective_trace

    def test_sparsity_reported_with_threshold(self):
        s = random_sample_cov(6, 15, 47)
        rho = 5.0 * np.max(np.abs(s))
        result = solve_ecm(s, rho, SolverConfig(outer_tol=1e-10, max_outer_iters=5000))
        # entries shrink below the reporting threshold but are not exact zeros
        assert result.nonzero_fraction == 0.0
        off = result.sigma_hat[~np.eye(6, dtype=bool)]
        assert np.all(off != 0.0)

    def test_input_not_mutated(self):
        s = random_sample_cov(4, 9, 48)
        s_copy = s.copy()
        solve_ecm(s, 0.1)
        np.testing.assert_array_equal(s, s_copy)

    def test_p1(self):
        result = solve_ecm(np.array([[2.0]]), 1.0)
        assert result.sigma_hat[0, 0] == pytest.approx(cd_variance_update(2.0, 1.0))

    def test_stationarity_at_solution(self):
        from covlasso.oracle import check_stationarity

        s = random_sample_cov(4, 16, 49)
        result = solve_ecm(s, 0.2, TIGHT)
        assert check_stationarity(result.sigma_hat, s, 0.2) >= -1e-4
