# -*- coding: utf-8 -*-
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from scipy.optimize import OptimizeResult

from soilqr import conf
from soilqr.design import CONTINUOUS, DUMMY, Column, DesignMatrix
from soilqr.exceptions import ConfigurationError, DesignError, DomainError, SolverError
from soilqr.features import INTERCEPT_COLUMN
from soilqr.oracle import SyntheticSpec, brute_force_qr
from soilqr.quantreg import (INTERIOR, MAX_ITER, VERTEX, SolverOptions, check_taus, fit_ols,
                             fit_profile, fit_quantile, pinball_loss)
from soilqr.solvers import frisch_newton, highs
from soilqr.tests.fixtures import design, synthetic_design


def loss(X, y, beta, tau):
    return float(np.sum(pinball_loss(y - X.values @ beta, tau)))


class PinballLossTestCase(SimpleTestCase):

    def test_values(self):
        self.assertEqual(pinball_loss(-3.0, 0.5), 3.0)
        self.assertEqual(pinball_loss(0.0, 0.95), 0.0)
        self.assertAlmostEqual(pinball_loss(-1.0, 0.05), 1.9)
        self.assertAlmostEqual(pinball_loss(1.0, 0.05), 0.1)
        np.testing.assert_allclose(pinball_loss([-2.0, 0.0, 4.0], 0.25), [3.0, 0.0, 2.0])

    def test_levels_outside_the_unit_interval(self):
        for tau in (0.0, 1.0, -0.1, 1.5, 'half'):
            with self.assertRaises(DomainError):
                pinball_loss(1.0, tau)

    def test_tau_grid(self):
        self.assertEqual(len(conf.TAUS), 19)
        self.assertAlmostEqual(conf.TAUS[0], 0.05)
        self.assertAlmostEqual(conf.TAUS[-1], 0.95)
        with self.assertRaises(ConfigurationError):
            check_taus([0.5, 0.25])
        with self.assertRaises(ConfigurationError):
            check_taus([])
        with self.assertRaises(DomainError):
            check_taus([0.5, 1.0])


class FitQuantileTestCase(SimpleTestCase):

    def test_intercept_only_median(self):
        X = DesignMatrix.intercept_only(5)
        fit = fit_quantile(X, [1.0, 2.0, 3.0, 4.0, 5.0], 0.5)
        self.assertEqual(fit.beta[0], 3.0)
        self.assertEqual(fit.solver_status, VERTEX)
        self.assertEqual(fit.objective, 6.0)
        self.assertEqual((fit.n_negative, fit.n_zero, fit.n_positive), (2, 1, 2))

    def test_intercept_only_order_statistic(self):
        y = np.random.default_rng(5).normal(size=100)
        fit = fit_quantile(DesignMatrix.intercept_only(100), y, 0.25)
        ordered = np.sort(y)
        # Every point between the 25th and 26th order statistic is optimal.
        self.assertIn(fit.beta[0], (ordered[24], ordered[25]))
        self.assertEqual(fit.solver_status, INTERIOR)
        expected = float(np.sum(pinball_loss(y - ordered[24], 0.25)))
        self.assertAlmostEqual(fit.objective, expected, delta=1e-10 * expected)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(17)
        for instance in range(20):
            x = rng.uniform(0, 1, 12)
            y = 1.0 + 2.0 * x + rng.standard_normal(12)
            X = design(x)
            tau = (0.2, 0.5, 0.8)[instance % 3]
            fit = fit_quantile(X, y, tau)
            beta, objective = brute_force_qr(X, y, tau)
            self.assertAlmostEqual(fit.objective, objective, delta=1e-8 * max(objective, 1.0))

    def test_residuals(self):
        X, y = synthetic_design(SyntheticSpec(n=200, beta_true=(1.0, 2.0, -1.0), seed=2))
        fit = fit_quantile(X, y, 0.3)
        np.testing.assert_allclose(fit.residuals, y - X.values @ fit.beta, atol=1e-9)
        self.assertAlmostEqual(fit.objective, loss(X, y, fit.beta, 0.3), delta=1e-10 * fit.objective)
        self.assertGreaterEqual(fit.n_zero, X.p + 1)
        np.testing.assert_allclose(fit.predict(X), X.values @ fit.beta)

    def test_coverage_bounds(self):
        X, y = synthetic_design(SyntheticSpec(n=500, beta_true=(0.0, 1.0, 2.0, -1.0),
                                              hetero_gamma=1.0, seed=7))
        for fit in fit_profile(X, y):
            bound = X.n * fit.tau + 1e-9
            self.assertLessEqual(fit.n_negative, bound)
            self.assertLessEqual(fit.n_positive, X.n - X.n * fit.tau + 1e-9)
            self.assertGreaterEqual(fit.n_negative + fit.n_zero, X.n * fit.tau - 1e-9)

    def test_equivariance(self):
        rng = np.random.default_rng(23)
        for instance in range(50):
            n = 30
            x = rng.uniform(0, 1, n)
            y = 0.5 - x + rng.standard_normal(n)
            X = design(x)
            tau = float(rng.uniform(0.1, 0.9))
            c = float(rng.uniform(0.5, 3.0))
            shift = np.array([1.5, -2.0])
            base = fit_quantile(X, y, tau)
            scaled = fit_quantile(X, c * y, tau)
            flipped = fit_quantile(X, -y, 1.0 - tau)
            shifted = fit_quantile(X, y + X.values @ shift, tau)

            tolerance = 1e-8 * max(base.objective, 1.0)
            self.assertAlmostEqual(scaled.objective, c * base.objective, delta=c * tolerance)
            self.assertAlmostEqual(flipped.objective, base.objective, delta=tolerance)
            self.assertAlmostEqual(shifted.objective, base.objective, delta=tolerance)
            # Coefficients only compare when the optimum is unique.
            if base.solver_status == VERTEX and scaled.solver_status == VERTEX:
                np.testing.assert_allclose(scaled.beta, c * base.beta, rtol=1e-8, atol=1e-8)
            if base.solver_status == VERTEX and flipped.solver_status == VERTEX:
                np.testing.assert_allclose(flipped.beta, -base.beta, rtol=1e-8, atol=1e-8)
            if base.solver_status == VERTEX and shifted.solver_status == VERTEX:
                np.testing.assert_allclose(shifted.beta, base.beta + shift, rtol=1e-8, atol=1e-8)

    def test_no_worse_than_least_squares(self):
        X, y = synthetic_design(SyntheticSpec(n=300, beta_true=(1.0, 3.0), noise='laplace', seed=4))
        ols = fit_ols(X, y)
        for tau in (0.1, 0.5, 0.9):
            self.assertLessEqual(fit_quantile(X, y, tau).objective, loss(X, y, ols.beta, tau) + 1e-9)

    def test_highs_agrees(self):
        X, y = synthetic_design(SyntheticSpec(n=150, beta_true=(1.0, 2.0, 0.5), seed=9))
        for tau in (0.1, 0.5, 0.9):
            fn = fit_quantile(X, y, tau)
            hi = fit_quantile(X, y, tau, SolverOptions(method='highs'))
            self.assertAlmostEqual(hi.objective, fn.objective, delta=1e-8 * fn.objective)

    def test_highs_with_ties_and_dummies(self):
        rng = np.random.default_rng(21)
        n = 600
        classes = rng.integers(0, 4, n)
        x = rng.uniform(0, 10, n)
        dummies = [(classes == level).astype(float) for level in (1, 2, 3)]
        y = np.round(2.0 + 0.5 * x + classes + rng.normal(0.0, 1.0, n))
        columns = [INTERCEPT_COLUMN, Column('x', CONTINUOUS, 'x')] + [
            Column('cls=%i' % level, DUMMY, 'cls') for level in (1, 2, 3)]
        X = DesignMatrix(np.column_stack([np.ones(n), x] + dummies), columns)
        # The default interior point cap is far below the simplex iterations needed here.
        options = SolverOptions(method='highs')
        self.assertLess(options.max_iterations, n)
        for tau in (0.05, 0.5, 0.95):
            fn = fit_quantile(X, y, tau)
            hi = fit_quantile(X, y, tau, options)
            self.assertAlmostEqual(hi.objective, fn.objective, delta=1e-7 * fn.objective)

    def test_highs_failure(self):
        X, y = synthetic_design(SyntheticSpec(n=30, beta_true=(1.0, 2.0), seed=2))
        result = OptimizeResult(status=1, x=None, nit=0, message='Iteration limit reached')
        with mock.patch('soilqr.solvers.linprog', return_value=result):
            with self.assertRaises(SolverError):
                highs(X.values, y, 0.5)

    def test_solver_options(self):
        with self.assertRaises(ConfigurationError):
            SolverOptions(method='simplex')
        with self.assertRaises(ConfigurationError):
            SolverOptions(max_iterations=0)
        X, y = synthetic_design(SyntheticSpec(n=50, beta_true=(1.0, 2.0), seed=1))
        solution = frisch_newton(X.values, y, 0.5, max_iterations=1)
        self.assertEqual(solution.iterations, 1)
        self.assertFalse(solution.converged)
        fit = fit_quantile(X, y, 0.5, SolverOptions(max_iterations=1))
        self.assertIn(fit.solver_status, (VERTEX, INTERIOR, MAX_ITER))
        self.assertEqual(fit.iterations, 1)

    def test_rank_deficient_design(self):
        x = np.random.default_rng(3).uniform(size=20)
        columns = [INTERCEPT_COLUMN, Column('x', CONTINUOUS, 'x'), Column('x_copy', CONTINUOUS, 'x_copy')]
        with self.assertRaises(DesignError) as cm:
            DesignMatrix(np.column_stack([np.ones(20), x, x]), columns)
        names = set(cm.exception.dependent)
        for partners in cm.exception.dependent.values():
            names.update(partners)
        self.assertIn('x', names)
        self.assertIn('x_copy', names)
        self.assertIn('x_copy', str(cm.exception))

    def test_too_few_observations(self):
        with self.assertRaises(DesignError):
            design([0.0, 1.0], [1.0, 3.0])

    def test_response_length(self):
        with self.assertRaises(Exception):
            fit_quantile(DesignMatrix.intercept_only(3), [1.0, 2.0], 0.5)


class FitProfileTestCase(SimpleTestCase):

    def test_default_grid_monotone_intercepts(self):
        y = np.random.default_rng(8).normal(size=100)
        profile = fit_profile(DesignMatrix.intercept_only(100), y)
        self.assertEqual(len(profile), 19)
        self.assertEqual(profile.taus, list(conf.TAUS))
        intercepts = profile.coefficients[:, 0]
        self.assertTrue(np.all(np.diff(intercepts) >= 0))

    def test_single_level(self):
        X, y = synthetic_design(SyntheticSpec(n=80, beta_true=(0.0, 1.0, 1.0), seed=6))
        profile = fit_profile(X, y, [0.5])
        self.assertEqual(len(profile), 1)
        np.testing.assert_array_equal(profile[0.5].beta, fit_quantile(X, y, 0.5).beta)
        self.assertEqual(profile.columns, X.columns)

    def test_workers(self):
        X, y = synthetic_design(SyntheticSpec(n=80, beta_true=(0.0, 1.0), seed=6))
        taus = [0.25, 0.5, 0.75]
        np.testing.assert_array_equal(fit_profile(X, y, taus, workers=1).coefficients,
                                      fit_profile(X, y, taus, workers=2).coefficients)


class FitOlsTestCase(SimpleTestCase):

    def test_exact_line(self):
        x = np.linspace(0, 1, 10)
        ols = fit_ols(design(x), 1.0 + 2.0 * x)
        np.testing.assert_allclose(ols.beta, [1.0, 2.0], atol=1e-10)
        self.assertLess(np.max(np.abs(ols.residuals)), 1e-10)
        self.assertAlmostEqual(ols.rss, 0.0, places=12)

    def test_intercept_only_mean(self):
        y = np.array([1.0, 2.0, 6.0])
        ols = fit_ols(DesignMatrix.intercept_only(3), y)
        self.assertAlmostEqual(ols.beta[0], 3.0)
        self.assertAlmostEqual(ols.sigma2_hat, 7.0)

    def test_normal_equations(self):
        X, y = synthetic_design(SyntheticSpec(n=120, beta_true=(1.0, -2.0, 0.5), seed=12))
        ols = fit_ols(X, y)
        np.testing.assert_allclose(X.values.T @ ols.residuals, 0.0, atol=1e-8)
        self.assertAlmostEqual(ols.sigma2_hat, ols.rss / (X.n - X.p - 1))

    def test_median_near_mean_for_symmetric_noise(self):
        X, y = synthetic_design(SyntheticSpec(n=2000, beta_true=(1.0, 2.0), seed=21))
        ols = fit_ols(X, y)
        median = fit_quantile(X, y, 0.5)
        # Standard errors of the median fit: sqrt(pi/2) times those of OLS.
        covariance = ols.sigma2_hat * np.linalg.inv(X.values.T @ X.values)
        se = np.sqrt(np.pi / 2 * np.diag(covariance))
        self.assertTrue(np.all(np.abs(median.beta - ols.beta) < 3 * se))
