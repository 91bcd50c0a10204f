import math

import mpmath
import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import special

from apps.core.exceptions import AccuracyError, DomainError
from .models import MLArgs, ScalarOdeData
from .services import (
    exact_constant_forcing,
    exact_homogeneous,
    exact_homogeneous_deriv,
    gamma_fn,
    log_gamma_fn,
    ml,
    ml_integral,
    ml_series,
    ml_values,
)


def mp_series(alpha, beta, t, dps=60, terms=600):
    with mpmath.workdps(dps):
        z = -mpmath.mpf(t)
        total = mpmath.mpf(0)
        for k in range(terms):
            total += z ** k * mpmath.rgamma(alpha * k + beta)
        return float(total)


def mp_integral(alpha, beta, t, dps=30):
    with mpmath.workdps(dps):
        a, b, t = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(t)
        sin_b, sin_ab, cos_a = mpmath.sinpi(b), mpmath.sinpi(a - b), mpmath.cospi(a)

        def integrand(r):
            phi = (r * sin_b - t * sin_ab) / (r * r + t * t + 2 * t * r * cos_a)
            return phi * r ** ((1 - b) / a) * mpmath.exp(-r ** (1 / a))

        value = mpmath.quad(integrand, [0, 1, 2, 4, 8, 16, 32, 64, mpmath.inf])
        return float(value / (mpmath.pi * a))


def l1_constant_forcing(alpha, lam, T, steps):
    """L1 time stepping de D^alpha y + lambda*y = 1, y(0) = 0; devuelve y(T)."""
    dt = T / steps
    b = np.arange(1, steps + 1) ** (1 - alpha) - np.arange(steps) ** (1 - alpha)
    coef = dt ** (-alpha) / special.gamma(2 - alpha)
    y = np.zeros(steps + 1)
    for n in range(1, steps + 1):
        increments = y[n - 1:0:-1] - y[n - 2::-1] if n > 1 else np.zeros(0)
        history = coef * np.dot(b[1:n], increments) - coef * y[n - 1]
        y[n] = (1.0 - history) / (coef + lam)
    return y[-1]


class GammaTests(SimpleTestCase):

    def test_integer_and_half_integer_values(self):
        self.assertAlmostEqual(gamma_fn(1), 1.0, places=15)
        self.assertAlmostEqual(gamma_fn(5), 24.0, places=12)
        assert_allclose(gamma_fn(0.5), math.sqrt(math.pi), rtol=1e-14)

    def test_matches_extended_precision(self):
        for z in (0.013, 0.37, 1.5, 7.25, 33.3, 120.5, 170.9):
            assert_allclose(gamma_fn(z), float(mpmath.gamma(z)), rtol=1e-13)

    def test_log_gamma_covers_overflow_range(self):
        for z in (150.0, 200.0, 1e4):
            assert_allclose(log_gamma_fn(z), float(mpmath.loggamma(z)), rtol=1e-13)
        with self.assertRaises(DomainError):
            gamma_fn(200.0)

    def test_poles_raise(self):
        for z in (0, -1, -2, -7):
            with self.assertRaises(DomainError):
                gamma_fn(z)

    def test_negative_non_integer_argument(self):
        assert_allclose(gamma_fn(-0.5), -2.0 * math.sqrt(math.pi), rtol=1e-14)


class MittagLefflerSeriesTests(SimpleTestCase):

    def test_zero_argument(self):
        self.assertEqual(ml_series(MLArgs(0.5, 1.0, 0.0)), 1.0)

    def test_exponential_limit(self):
        for t in (0.0, 0.3, 1.0, 2.5):
            assert_allclose(ml_series(MLArgs(1.0, 1.0, t)), math.exp(-t), rtol=1e-14)

    def test_extended_precision_oracle(self):
        assert_allclose(ml_series(MLArgs(0.5, 1.0, 1.0)), mp_series(0.5, 1.0, 1.0), rtol=1e-12)

    def test_budget_exhaustion_raises(self):
        with self.assertRaises(AccuracyError):
            ml_series(MLArgs(0.1, 0.5, 30.0))


class MittagLefflerIntegralTests(SimpleTestCase):

    def test_small_argument_limit(self):
        value = ml_integral(MLArgs(0.5, 0.5, 1e-12))
        assert_allclose(value, 1.0 / math.sqrt(math.pi), rtol=1e-9)

    def test_matches_series_in_overlap(self):
        assert_allclose(ml_integral(MLArgs(0.5, 0.5, 1.0)), ml_series(MLArgs(0.5, 0.5, 1.0)), rtol=1e-10)

    def test_series_agreement_grid(self):
        for alpha in np.arange(0.1, 0.95, 0.1):
            for beta in (0.5, alpha, 0.0, -0.5):
                for t in (0.1, 0.4, 0.8, 1.0):
                    series = ml_series(MLArgs(alpha, beta, t))
                    integral = ml_integral(MLArgs(alpha, beta, t))
                    self.assertLessEqual(abs(series - integral), 1e-9 * (1 + abs(series)))

    def test_large_arguments_against_quadrature_oracle(self):
        for alpha in (0.3, 0.7):
            for t in (5.0, 50.0, 1e3):
                assert_allclose(ml_integral(MLArgs(alpha, 0.5, t)), mp_integral(alpha, 0.5, t), rtol=1e-9)

    def test_algebraic_tail(self):
        # E_{a,b}(-t) ~ t^{-1}/Gamma(b - a)
        t = 1e8
        value = ml_integral(MLArgs(0.7, 0.3, t))
        assert_allclose(value * t, 1.0 / special.gamma(-0.4), rtol=1e-6)
        self.assertLessEqual(abs(value) * t / special.gamma(1.4), 1.0)

    def test_beta_at_least_one_rejected(self):
        with self.assertRaises(DomainError):
            ml_integral(MLArgs(0.5, 1.0, 2.0))

    def test_zero_argument_rejected(self):
        with self.assertRaises(DomainError):
            ml_integral(MLArgs(0.5, 0.5, 0.0))


class MittagLefflerDispatchTests(SimpleTestCase):

    def test_zero_argument(self):
        self.assertEqual(ml(MLArgs(0.5, 1.0, 0.0)), 1.0)

    def test_half_order_closed_form(self):
        # E_{1/2,1}(-t) = exp(t^2) erfc(t)
        t = np.array([0.5, 1.0, 2.0, 10.0, 1e2, 1e4, 1e6])
        assert_allclose(ml_values(0.5, 1.0, t), special.erfcx(t), rtol=1e-10)

    def test_series_and_reduced_integral_paths_agree(self):
        for t in (0.5, 2.0):
            via_series = ml_series(MLArgs(0.5, 1.0, t))
            lower = ml_integral(MLArgs(0.5, 0.5, t))
            via_integral = (lower - 1.0 / gamma_fn(0.5)) / (-t)
            assert_allclose(via_series, via_integral, rtol=1e-9)

    def test_shifted_beta_against_oracle(self):
        assert_allclose(ml(MLArgs(0.5, 1.5, 1.0)), mp_series(0.5, 1.5, 1.0), rtol=1e-11)
        assert_allclose(ml(MLArgs(0.5, 1.5, 3.0)), mp_series(0.5, 1.5, 3.0), rtol=1e-9)

    def test_continuity_across_seam(self):
        for alpha in (0.3, 0.5, 0.8):
            for beta in (1.0, alpha, alpha + 1.0, alpha - 1.0):
                below = ml(MLArgs(alpha, beta, 1.0 - 1e-12))
                above = ml(MLArgs(alpha, beta, 1.0))
                self.assertLessEqual(abs(below - above), 1e-9)

    def test_monotone_relaxation(self):
        t = np.concatenate([np.linspace(0.0, 3.0, 61), np.geomspace(3.0, 1e6, 60)])
        for alpha in (0.2, 0.5, 0.9):
            values = ml_values(alpha, 1.0, t)
            self.assertTrue(np.all(np.diff(values) <= 1e-14))

    def test_uniform_bound(self):
        fit = np.geomspace(1e-3, 1e4, 40)
        check = np.geomspace(1.3e-3, 2e5, 37)
        for alpha in (0.3, 0.6):
            for beta in (1.0, alpha, alpha + 1.0):
                constant = np.max(np.abs(ml_values(alpha, beta, fit)) * (1 + fit))
                scaled = np.abs(ml_values(alpha, beta, check)) * (1 + check)
                self.assertTrue(np.all(scaled <= 1.05 * constant))

    def test_decay_for_shifted_indices(self):
        t = np.geomspace(1.0, 1e10, 30)
        alpha = 0.6
        for k in (1, 2, 3):
            beta = alpha + 1 - k
            for theta in (0, 1, 2):
                scaled = np.abs(ml_values(alpha, beta, t)) * t ** theta / abs(special.gamma(1 + theta * alpha - beta))
                self.assertLess(np.max(scaled), 10.0)

    def test_alpha_one_non_integer_beta_rejected(self):
        with self.assertRaises(DomainError):
            ml(MLArgs(1.0, 0.5, 3.0))


class ScalarOdeSolutionTests(SimpleTestCase):

    def test_homogeneous_initial_value(self):
        self.assertEqual(exact_homogeneous(ScalarOdeData(0.4, 7.0, 2.5), 0.0), 2.5)

    def test_homogeneous_without_decay(self):
        self.assertAlmostEqual(exact_homogeneous(ScalarOdeData(0.4, 0.0, 3.0), 0.7), 3.0, places=14)

    def test_homogeneous_classical_limit(self):
        assert_allclose(exact_homogeneous(ScalarOdeData(1.0, 2.0, 1.0), 1.0), math.exp(-2.0), rtol=1e-13)

    def test_homogeneous_vectorized(self):
        data = ScalarOdeData(0.5, 1.0, 1.0)
        t = np.array([0.0, 0.25, 1.0])
        assert_allclose(exact_homogeneous(data, t), special.erfcx(np.sqrt(t)), rtol=1e-12)

    def test_constant_forcing_limits(self):
        data = ScalarOdeData(0.3, 0.0, 0.0)
        self.assertEqual(exact_constant_forcing(ScalarOdeData(0.3, 2.0, 0.0), 0.0), 0.0)
        assert_allclose(exact_constant_forcing(data, 0.8), 0.8 ** 0.3 / special.gamma(1.3), rtol=1e-13)

    def test_constant_forcing_against_l1_scheme(self):
        data = ScalarOdeData(0.5, 1.0, 0.0)
        reference = l1_constant_forcing(0.5, 1.0, 1.0, 4000)
        assert_allclose(exact_constant_forcing(data, 1.0), reference, rtol=2e-3)

    def test_constant_forcing_requires_zero_initial_value(self):
        with self.assertRaises(DomainError):
            exact_constant_forcing(ScalarOdeData(0.5, 1.0, 1.0), 0.5)

    def test_out_of_horizon_rejected(self):
        with self.assertRaises(DomainError):
            exact_homogeneous(ScalarOdeData(0.5, 1.0, 1.0), 1.5)

    def test_derivative_limits(self):
        self.assertEqual(exact_homogeneous_deriv(1, ScalarOdeData(0.5, 0.0, 1.0), 0.3), 0.0)
        for t in (0.2, 0.9):
            assert_allclose(exact_homogeneous_deriv(1, ScalarOdeData(1.0, 1.0, 1.0), t), -math.exp(-t), rtol=1e-13)

    def test_second_derivative_finite_difference(self):
        data = ScalarOdeData(0.5, 1.0, 1.0)
        t, step = 0.5, 1e-4
        values = exact_homogeneous(data, np.array([t - step, t, t + step]))
        fd = (values[0] - 2 * values[1] + values[2]) / step ** 2
        assert_allclose(exact_homogeneous_deriv(2, data, t), fd, rtol=1e-5)

    def test_derivative_singular_at_origin(self):
        with self.assertRaises(DomainError):
            exact_homogeneous_deriv(1, ScalarOdeData(0.5, 1.0, 1.0), 0.0)

    def test_derivative_order_capped(self):
        with self.assertRaises(DomainError):
            exact_homogeneous_deriv(9, ScalarOdeData(0.5, 1.0, 1.0), 0.5)
        with self.assertRaises(DomainError):
            exact_homogeneous_deriv(0, ScalarOdeData(0.5, 1.0, 1.0), 0.5)
