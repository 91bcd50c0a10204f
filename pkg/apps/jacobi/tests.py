import math

import mpmath
import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import integrate, special

from apps.core.exceptions import DomainError
from .models import Expansion, JacobiWeight, WeightedFracImage
from .serializers import expansion_from_csv, expansion_to_csv
from .services import (
    basis_change_matrix,
    change_basis,
    eval_shifted,
    frac_deriv_map,
    frac_integral_map,
    frac_pairing,
    gauss_rule,
    pairing_diagonal,
    project,
    reflect,
    xi,
)


def rodrigues(a, b, T, k, t):
    """S_k^{a,b}(t) por la fórmula de Rodrigues, en precisión extendida."""
    with mpmath.workdps(40):
        a, b, T, t = (mpmath.mpf(v) for v in (a, b, T, t))
        inner = lambda s: (T - s) ** (k + a) * s ** (k + b)
        derivative = mpmath.diff(inner, t, k)
        value = (-1) ** k / (mpmath.factorial(k) * T ** k) * (T - t) ** (-a) * t ** (-b) * derivative
        return float(value)


def as_polynomial(e: Expansion):
    ts = np.linspace(0.0, e.weight.T, 3 * (e.degree + 1))
    return np.polynomial.Polynomial.fit(ts, e(ts), e.degree)


def rl_left_derivative(poly, theta, t):
    """D^theta_{0+} p(t) = [t^{-theta} p(0) + int_0^t u^{-theta} p'(t-u) du] / Gamma(1-theta)."""
    dp = poly.deriv()
    tail, _ = integrate.quad(lambda u: dp(t - u), 0.0, t, weight='alg', wvar=(-theta, 0.0), epsabs=1e-14)
    return (t ** (-theta) * poly(0.0) + tail) / special.gamma(1 - theta)


def rl_right_derivative(poly, theta, t, T):
    """D^theta_{T-} p(t) = [(T-t)^{-theta} p(T) - int_0^{T-t} u^{-theta} p'(t+u) du] / Gamma(1-theta)."""
    dp = poly.deriv()
    tail, _ = integrate.quad(lambda u: dp(t + u), 0.0, T - t, weight='alg', wvar=(-theta, 0.0), epsabs=1e-14)
    return ((T - t) ** (-theta) * poly(T) - tail) / special.gamma(1 - theta)


def monomial_pairing(pp, qq, theta, T=1.0):
    """
    <D^theta_{0+} p, D^theta_{T-} q> en forma cerrada sobre monomios.

    D^theta_{0+} t^n = n! / Gamma(n+1-theta) t^{n-theta}, y lo mismo en (T-t) por la derecha;
    cada producto se integra con una función Beta.
    """
    left = pp.convert().coef
    right = qq.convert()(np.polynomial.Polynomial([T, -1.0])).coef
    with mpmath.workdps(30):
        total = mpmath.mpf(0)
        for n, c in enumerate(left):
            for m, d in enumerate(right):
                a, b = n + 1 - theta, m + 1 - theta
                total += (mpmath.mpf(c) * d * mpmath.factorial(n) * mpmath.factorial(m)
                          / (mpmath.gamma(a) * mpmath.gamma(b)) * T ** (a + b - 1) * mpmath.beta(a, b))
        return float(total)


def rl_left_integral(poly, theta, t):
    value, _ = integrate.quad(poly, 0.0, t, weight='alg', wvar=(0.0, theta - 1.0), epsabs=1e-14)
    return value / special.gamma(theta)


class EvaluationTests(SimpleTestCase):

    def test_degree_zero_is_one(self):
        for weight in (JacobiWeight(0.3, -0.4, 2.0), JacobiWeight(-0.9, 0.0)):
            assert_allclose(eval_shifted(weight, 0, np.array([0.0, 0.3, 0.9])), 1.0)

    def test_legendre_degree_one(self):
        t = np.array([0.0, 0.25, 0.7, 1.0])
        assert_allclose(eval_shifted(JacobiWeight.legendre(), 1, t), 2 * t - 1, atol=1e-15)

    def test_matches_rodrigues_formula(self):
        for T in (1.0, 2.5):
            weight = JacobiWeight(-0.5, 0.25, T)
            for t in np.array([0.13, 0.41, 0.77, 0.95]) * T:
                assert_allclose(eval_shifted(weight, 7, t), rodrigues(-0.5, 0.25, T, 7, t), rtol=1e-8, atol=1e-10)

    def test_out_of_interval_rejected(self):
        with self.assertRaises(DomainError):
            eval_shifted(JacobiWeight.legendre(), 2, 1.5)

    def test_invalid_weight_rejected(self):
        with self.assertRaises(DomainError):
            JacobiWeight(-1.0, 0.0)
        with self.assertRaises(DomainError):
            JacobiWeight(0.0, 0.0, 0.0)


class OrthogonalityConstantTests(SimpleTestCase):

    def test_legendre_norms(self):
        k = np.arange(10)
        assert_allclose(xi(JacobiWeight.legendre(2.0), k), 2.0 / (2 * k + 1), rtol=1e-14)

    def test_hand_evaluated_case(self):
        assert_allclose(xi(JacobiWeight(-0.5, 0.0), 2), 2.0 / 9.0, rtol=1e-14)

    def test_fractional_weight_closed_form(self):
        alpha, T = 0.35, 1.7
        k = np.arange(30)
        assert_allclose(xi(JacobiWeight(-alpha, 0.0, T), k), T ** (1 - alpha) / (2 * k + 1 - alpha), rtol=1e-13)

    def test_gram_matrices_are_diagonal(self):
        degree = 40
        for alpha in (0.25, 0.5, 0.75):
            for a, b in ((0.0, 0.0), (-alpha, 0.0), (0.0, -alpha), (-alpha / 2, -alpha / 2)):
                weight = JacobiWeight(a, b)
                rule = gauss_rule(weight, degree + 1)
                V = weight.vandermonde(degree, rule.nodes)
                gram = (V * rule.weights[:, None]).T @ V
                assert_allclose(gram, np.diag(xi(weight, np.arange(degree + 1))), atol=1e-11)


class GaussRuleTests(SimpleTestCase):

    def test_single_node_midpoint(self):
        rule = gauss_rule(JacobiWeight.legendre(), 1)
        assert_allclose(rule.nodes, [0.5])
        assert_allclose(rule.weights, [1.0])

    def test_moment_exactness(self):
        for a, b, T in ((0.0, 0.0, 1.0), (-0.4, 0.0, 1.0), (0.3, -0.6, 2.0), (-0.5, -0.5, 0.7)):
            n = 9
            rule = gauss_rule(JacobiWeight(a, b, T), n)
            for m in range(2 * n):
                with mpmath.workdps(30):
                    exact = T ** (a + b + m + 1) * mpmath.gamma(a + 1) * mpmath.gamma(b + m + 1) / mpmath.gamma(a + b + m + 2)
                assert_allclose(rule.integrate(rule.nodes ** m), float(exact), rtol=1e-11)

    def test_random_polynomial_exactness(self):
        rng = np.random.default_rng(23)
        alpha = 0.6
        coeffs = rng.standard_normal(24)
        rule = gauss_rule(JacobiWeight(-alpha, 0.0), 12)
        approx = rule.integrate(np.polynomial.polynomial.polyval(rule.nodes, coeffs))
        with mpmath.workdps(30):
            exact = sum(
                c * mpmath.beta(1 - alpha, m + 1) for m, c in enumerate(coeffs)
            )
        assert_allclose(approx, float(exact), rtol=1e-10)

    def test_nodes_interior_and_weights_positive(self):
        rule = gauss_rule(JacobiWeight(-0.8, 0.5, 3.0), 50)
        self.assertTrue(np.all(rule.nodes > 0) and np.all(rule.nodes < 3.0))
        self.assertTrue(np.all(rule.weights > 0))

    def test_empty_rule_rejected(self):
        with self.assertRaises(DomainError):
            gauss_rule(JacobiWeight.legendre(), 0)


class ProjectionTests(SimpleTestCase):

    def test_reproduces_basis_polynomial(self):
        weight = JacobiWeight(-0.3, 0.2)
        e = project(lambda t: eval_shifted(weight, 3, t), weight, 3)
        assert_allclose(e.coeffs, [0, 0, 0, 1], atol=1e-13)

    def test_singular_power_residual_decay(self):
        for alpha in (0.3, 0.5):
            weight = JacobiWeight(-alpha, 0.0)
            full = project(np.ones_like, weight, 200, left_power=alpha)
            energy = xi(weight, np.arange(201)) * full.coeffs ** 2
            Ms = np.array([8, 12, 16, 24, 32, 48])
            residuals = np.sqrt([energy[M + 1:].sum() for M in Ms])
            slope = np.polyfit(np.log(Ms), np.log(residuals), 1)[0]
            self.assertAlmostEqual(slope, -1 - 2 * alpha, delta=0.15)

    def test_composite_refinement_matches_known_singularity(self):
        weight = JacobiWeight(-0.4, 0.0)
        known = project(np.cos, weight, 12, left_power=0.37)
        refined = project(lambda t: t ** 0.37 * np.cos(t), weight, 12, composite=True)
        assert_allclose(refined.coeffs, known.coeffs, atol=1e-8)

    def test_rule_weight_mismatch_rejected(self):
        weight = JacobiWeight(-0.4, 0.0)
        with self.assertRaises(DomainError):
            project(np.cos, weight, 5, gauss_rule(JacobiWeight.legendre(), 20))

    def test_plateau_warning(self):
        weight = JacobiWeight.legendre()
        scale = 1.0 / np.sqrt(xi(weight, np.arange(81)))
        flat = Expansion(weight, scale)
        with self.assertLogs('apps.jacobi.services', level='WARNING'):
            project(flat, weight, 40)

    def test_degree_cap(self):
        with self.assertRaises(DomainError):
            project(np.cos, JacobiWeight.legendre(), 201)


class BasisChangeTests(SimpleTestCase):

    def test_identity(self):
        e = Expansion(JacobiWeight(-0.5, 0.0), [1.0, -2.0, 0.5])
        self.assertIs(change_basis(e, JacobiWeight(-0.5, 0.0)), e)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        source = JacobiWeight.legendre()
        e = Expansion(source, rng.standard_normal(30))
        there = change_basis(e, JacobiWeight(0.0, -0.7))
        back = change_basis(there, source)
        assert_allclose(back.coeffs, e.coeffs, atol=1e-11)

    def test_pointwise_values_preserved(self):
        rng = np.random.default_rng(11)
        e = Expansion(JacobiWeight.legendre(), [0, 0, 1.0])
        moved = change_basis(e, JacobiWeight(-0.5, 0.0))
        t = rng.uniform(0, 1, 10)
        assert_allclose(moved(t), e(t), atol=1e-12)

    def test_matrix_is_upper_triangular_and_read_only(self):
        C = basis_change_matrix(JacobiWeight.legendre(), JacobiWeight(-0.3, 0.0), 6)
        self.assertTrue(np.all(np.tril(C, -1) == 0))
        self.assertNotEqual(C[0, 1], 0.0)
        self.assertFalse(C.flags.writeable)

    def test_interval_mismatch_rejected(self):
        e = Expansion(JacobiWeight.legendre(1.0), [1.0])
        with self.assertRaises(DomainError):
            change_basis(e, JacobiWeight(0.0, 0.0, 2.0))

    def test_reflection(self):
        rng = np.random.default_rng(2)
        e = Expansion(JacobiWeight(0.2, -0.5, 1.5), rng.standard_normal(6))
        mirrored = reflect(e)
        t = rng.uniform(0, 1.5, 8)
        assert_allclose(mirrored(t), e(1.5 - t), atol=1e-12)


class FractionalMapTests(SimpleTestCase):

    def test_half_order_image_basis(self):
        alpha = 0.6
        e = Expansion(JacobiWeight(-alpha, 0.0), np.ones(5))
        image = frac_deriv_map(e, alpha / 2)
        k = np.arange(5)
        assert_allclose(image.coeffs, special.factorial(k) / special.gamma(k + 1 - alpha / 2), rtol=1e-13)
        self.assertAlmostEqual(image.weight.a, -alpha / 2)
        self.assertAlmostEqual(image.weight.b, -alpha / 2)

    def test_derivative_of_constant(self):
        theta = 0.35
        image = frac_deriv_map(Expansion(JacobiWeight.legendre(), [1.0]), theta)
        assert_allclose(image.coeffs, [1 / special.gamma(1 - theta)])
        t = np.array([0.1, 0.5, 0.9])
        assert_allclose(image(t), t ** (-theta) / special.gamma(1 - theta), rtol=1e-14)

    def test_left_derivative_against_singular_quadrature(self):
        rng = np.random.default_rng(7)
        theta = 0.3
        e = Expansion(JacobiWeight(-0.1, 0.0), rng.standard_normal(6))
        image = frac_deriv_map(e, theta)
        poly = as_polynomial(e)
        for t in (0.15, 0.5, 0.85):
            assert_allclose(image(t), rl_left_derivative(poly, theta, t), rtol=1e-6, atol=1e-8)

    def test_right_derivative_against_singular_quadrature(self):
        rng = np.random.default_rng(8)
        theta, T = 0.45, 2.0
        e = Expansion(JacobiWeight(0.0, -0.2, T), rng.standard_normal(5))
        image = frac_deriv_map(e, theta, side='right')
        self.assertAlmostEqual(image.weight.a, -theta)
        poly = as_polynomial(e)
        for t in (0.2, 1.0, 1.7):
            assert_allclose(image(t), rl_right_derivative(poly, theta, t, T), rtol=1e-6, atol=1e-8)

    def test_integral_of_constant(self):
        theta = 0.4
        image = frac_integral_map(Expansion(JacobiWeight(0.5, 0.0), [1.0]), theta)
        t = np.array([0.2, 0.6])
        assert_allclose(image(t), t ** theta / special.gamma(1 + theta), rtol=1e-14)

    def test_derivative_undoes_integral(self):
        rng = np.random.default_rng(3)
        theta = 0.55
        e = Expansion(JacobiWeight(0.2, 0.0), rng.standard_normal(8))
        back = frac_deriv_map(frac_integral_map(e, theta), theta)
        assert_allclose(back.coeffs, e.coeffs, rtol=1e-12)
        self.assertAlmostEqual(back.weight.a, 0.2)
        self.assertEqual(back.weight.b, 0.0)

    def test_integral_undoes_derivative(self):
        e = Expansion(JacobiWeight(0.0, -0.3), [0.5, 1.0, -1.5])
        back = frac_integral_map(frac_deriv_map(e, 0.25, side='right'), 0.25)
        assert_allclose(back.coeffs, e.coeffs, rtol=1e-12)

    def test_integral_against_quadrature(self):
        rng = np.random.default_rng(9)
        theta = 0.6
        e = Expansion(JacobiWeight(0.1, 0.0), rng.standard_normal(5))
        image = frac_integral_map(e, theta)
        poly = as_polynomial(e)
        for t in (0.1, 0.45, 0.95):
            assert_allclose(image(t), rl_left_integral(poly, theta, t), rtol=1e-8, atol=1e-10)

    def test_incompatible_weights_rejected(self):
        with self.assertRaises(DomainError):
            frac_deriv_map(Expansion(JacobiWeight(0.0, 0.3), [1.0]), 0.5)
        with self.assertRaises(DomainError):
            frac_integral_map(Expansion(JacobiWeight(-0.5, 0.0), [1.0]), 0.6)
        with self.assertRaises(DomainError):
            frac_deriv_map(Expansion(JacobiWeight.legendre(), [1.0]), 1.0)

    def test_mismatched_inverse_rejected(self):
        image = frac_deriv_map(Expansion(JacobiWeight.legendre(), [1.0]), 0.3)
        with self.assertRaises(DomainError):
            frac_deriv_map(image, 0.3)
        with self.assertRaises(DomainError):
            frac_integral_map(image, 0.4)


class FractionalPairingTests(SimpleTestCase):

    def test_constants(self):
        for alpha, T in ((0.3, 1.0), (0.7, 2.0)):
            one = Expansion(JacobiWeight.legendre(T), [1.0])
            expected = T ** (1 - alpha) / ((1 - alpha) * special.gamma(1 - alpha))
            assert_allclose(frac_pairing(one, one, alpha), expected, rtol=1e-13)
            moment = JacobiWeight(-alpha / 2, -alpha / 2, T).moment(0) / special.gamma(1 - alpha / 2) ** 2
            assert_allclose(frac_pairing(one, one, alpha), moment, rtol=1e-13)

    def test_diagonal_large_degree_finite(self):
        d = pairing_diagonal(0.5, 200)
        self.assertTrue(np.all(np.isfinite(d)) and np.all(d > 0))

    def test_self_pairing_nonnegative(self):
        rng = np.random.default_rng(1)
        for alpha in (0.2, 0.5, 0.9):
            for _ in range(5):
                p = Expansion(JacobiWeight.legendre(), rng.standard_normal(8))
                self.assertGreater(frac_pairing(p, p, alpha), 0.0)

    def test_against_singular_quadrature(self):
        rng = np.random.default_rng(4)
        alpha = 0.5
        theta = alpha / 2
        p = Expansion(JacobiWeight.legendre(), rng.standard_normal(7))
        q = Expansion(JacobiWeight.legendre(), rng.standard_normal(7))
        brute = monomial_pairing(as_polynomial(p), as_polynomial(q), theta)
        assert_allclose(frac_pairing(p, q, alpha), brute, rtol=1e-8)

    def test_linear_against_constant(self):
        legendre = JacobiWeight.legendre()
        p = Expansion(legendre, [0.5, 0.5])
        self.assertAlmostEqual(float(p(np.array([0.25]))[0]), 0.25, places=14)
        one = Expansion(legendre, [1.0])
        self.assertAlmostEqual(frac_pairing(p, one, 0.5), 1 / special.gamma(2.5), places=12)

    def test_reflection_symmetry(self):
        rng = np.random.default_rng(6)
        p = Expansion(JacobiWeight.legendre(1.3), rng.standard_normal(9))
        q = Expansion(JacobiWeight.legendre(1.3), rng.standard_normal(6))
        assert_allclose(frac_pairing(p, q, 0.4), frac_pairing(reflect(q), reflect(p), 0.4), rtol=1e-11)

    def test_projection_tail_is_orthogonal(self):
        rng = np.random.default_rng(10)
        alpha = 0.45
        weight = JacobiWeight(-alpha, 0.0)
        v = project(lambda t: np.exp(t) * np.cos(3 * t), weight, 60)
        for M in (5, 10, 20):
            tail_coeffs = np.array(v.coeffs)
            tail_coeffs[:M + 1] = 0.0
            tail = Expansion(weight, tail_coeffs)
            for _ in range(3):
                q = Expansion(JacobiWeight.legendre(), rng.standard_normal(M + 1))
                self.assertLessEqual(abs(frac_pairing(tail, q, alpha)), 1e-9)

    def test_projection_is_seminorm_stable(self):
        alpha = 0.5
        weight = JacobiWeight(-alpha, 0.0)
        sec = 1.0 / math.cos(alpha * math.pi / 2)

        def seminorm(e):
            return math.sqrt(sec * frac_pairing(e, e, alpha))

        def ratios(f):
            full = project(f, weight, 60)
            return [seminorm(full.truncated(M)) / seminorm(full) for M in (2, 4, 8, 16)]

        fitted = max(max(ratios(f)) for f in (np.exp, lambda t: np.sin(4 * t), lambda t: 1 / (1.5 - t)))
        frozen = 1.25 * fitted
        for f in (lambda t: np.cos(7 * t), lambda t: np.exp(-3 * t) * t, lambda t: np.sqrt(t + 0.2)):
            self.assertLessEqual(max(ratios(f)), frozen)

    def test_other_basis_inputs(self):
        alpha = 0.3
        legendre = Expansion(JacobiWeight.legendre(), [0.2, -1.0, 0.7])
        moved = change_basis(legendre, JacobiWeight(-alpha, 0.0))
        assert_allclose(frac_pairing(moved, legendre, alpha), frac_pairing(legendre, legendre, alpha), rtol=1e-12)


class ExpansionCsvTests(SimpleTestCase):

    def test_round_trip(self):
        weight = JacobiWeight(-0.25, 0.0)
        e = Expansion(weight, [1.0, -2.5e-3, 3.14159e-12])
        text = expansion_to_csv(e)
        self.assertTrue(text.startswith('k,v_k\n'))
        restored = expansion_from_csv(text, weight)
        assert_allclose(restored.coeffs, e.coeffs, rtol=0, atol=0)

    def test_gaps_rejected(self):
        with self.assertRaises(DomainError):
            expansion_from_csv('k,v_k\n0,1.0\n2,3.0\n', JacobiWeight.legendre())

    def test_invalid_values_rejected(self):
        with self.assertRaises(DomainError):
            expansion_from_csv('k,v_k\n0,abc\n', JacobiWeight.legendre())


class FracImageTests(SimpleTestCase):

    def test_invalid_side_rejected(self):
        with self.assertRaises(DomainError):
            WeightedFracImage(0.5, 'middle', JacobiWeight.legendre(), [1.0])
