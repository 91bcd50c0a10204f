import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import linalg, special

from apps.core.exceptions import DomainError, NumericError
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import frac_pairing, pairing_diagonal, project
from apps.jacobi.tests import rl_left_derivative, rl_right_derivative
from apps.special_fn.models import ScalarOdeData
from apps.special_fn.services import exact_constant_forcing, exact_homogeneous
from .models import (
    CallableForcing,
    ConstantForcing,
    FracOdeProblem,
    ModalForcing,
    PowerForcing,
    ScalarSpectralSolution,
    ZeroForcing,
)
from .services import (
    assemble,
    coercivity_margin,
    fractional_block,
    l2_distance,
    residual_check,
    solve,
    solve_modes,
)

M_GRID = np.array([8, 12, 16, 24, 32, 48, 64])


def fitted_slope(Ms, errors):
    return np.polyfit(np.log(Ms), np.log(errors), 1)[0]


class AssemblyTests(SimpleTestCase):

    def test_single_mode_without_reaction(self):
        alpha = 0.35
        assert_allclose(assemble(alpha, 0.0, 0), [[pairing_diagonal(alpha, 0)[0]]], rtol=1e-14)

    def test_mass_block(self):
        difference = assemble(0.5, 1.0, 2) - assemble(0.5, 0.0, 2)
        assert_allclose(difference, np.diag([1.0, 1 / 3, 1 / 5]), atol=1e-15)

    def test_entries_match_pairing(self):
        alpha, M, T = 0.6, 5, 1.5
        F = fractional_block(alpha, M, T)
        legendre = JacobiWeight.legendre(T)
        for i in range(M + 1):
            for j in range(M + 1):
                Li = Expansion(legendre, np.eye(M + 1)[i])
                Lj = Expansion(legendre, np.eye(M + 1)[j])
                assert_allclose(F[i, j], frac_pairing(Lj, Li, alpha), atol=1e-13)

    def test_against_singular_quadrature(self):
        alpha, M = 0.4, 6
        theta = alpha / 2
        x, w = special.roots_jacobi(40, -theta, -theta)
        t = 0.5 * (x + 1)
        w = w * 0.5 ** (1 - alpha)
        polys = [np.polynomial.Legendre.basis(j, domain=[0, 1]) for j in range(M + 1)]
        left = np.array([[s ** theta * rl_left_derivative(p, theta, s) for s in t] for p in polys])
        right = np.array([[(1 - s) ** theta * rl_right_derivative(p, theta, s, 1.0) for s in t] for p in polys])
        brute = (right * w) @ left.T
        assert_allclose(assemble(alpha, 0.0, M), brute, atol=1e-8)

    def test_cached_matrices_are_read_only(self):
        A = assemble(0.5, 2.0, 4)
        self.assertFalse(A.flags.writeable)
        self.assertIs(A, assemble(0.5, 2.0, 4))

    def test_order_validated(self):
        with self.assertRaises(DomainError):
            fractional_block(1.0, 3)


class CoercivityTests(SimpleTestCase):

    def test_symmetric_part_positive_definite(self):
        for alpha in (0.25, 0.5, 0.75):
            for M in (0, 5, 20, 60):
                self.assertGreater(coercivity_margin(alpha, M), 0.0)


class SolveTests(SimpleTestCase):

    def test_zero_problem_keeps_offset(self):
        problem = FracOdeProblem(ScalarOdeData(0.5, 0.0, 2.0))
        sol = solve(problem, 6)
        assert_allclose(sol.poly.coeffs, 0.0, atol=1e-15)
        assert_allclose(sol(np.array([0.0, 0.4, 1.0])), 2.0)

    def test_hand_solvable_single_mode(self):
        alpha = 0.5
        problem = FracOdeProblem(ScalarOdeData(alpha, 0.0, 0.0), ConstantForcing(1.0))
        sol = solve(problem, 0)
        assert_allclose(sol.poly.coeffs, [1.0 / pairing_diagonal(alpha, 0)[0]], rtol=1e-14)
        self.assertLessEqual(residual_check(problem, sol), 1e-12)

    def test_homogeneous_convergence_rate(self):
        alpha = 0.5
        data = ScalarOdeData(alpha, 1.0, 1.0)
        problem = FracOdeProblem(data)
        errors = [l2_distance(solve(problem, M), lambda t: exact_homogeneous(data, t)) for M in M_GRID]
        self.assertAlmostEqual(fitted_slope(M_GRID, errors), -1 - 2 * alpha, delta=0.15)
        self.assertTrue(np.all(np.diff(errors) <= 1e-12))

    def test_constant_forcing_convergence_rate(self):
        alpha = 0.5
        data = ScalarOdeData(alpha, 1.0, 0.0)
        problem = FracOdeProblem(data, ConstantForcing(1.0))
        errors = [l2_distance(solve(problem, M), lambda t: exact_constant_forcing(data, t)) for M in M_GRID]
        self.assertAlmostEqual(fitted_slope(M_GRID, errors), -1 - 2 * alpha, delta=0.15)

    def test_homogeneous_seminorm_rate(self):
        alpha = 0.5
        data = ScalarOdeData(alpha, 1.0, 1.0)
        problem = FracOdeProblem(data)
        reference = project(lambda t: exact_homogeneous(data, t) - 1.0, JacobiWeight.legendre(), 200)
        sec = 1.0 / math.cos(alpha * math.pi / 2)
        Ms = np.array([4, 6, 8, 12, 16, 24])
        errors = []
        for M in Ms:
            diff = solve(problem, M).poly - reference
            errors.append(math.sqrt(sec * frac_pairing(diff, diff, alpha)))
        self.assertAlmostEqual(fitted_slope(Ms, errors), -1 - alpha, delta=0.15)

    def test_manufactured_polynomial_is_reproduced(self):
        alpha, lam, y0 = 0.4, 3.0, 0.7
        coeffs = {1: 1.0, 2: 2.0, 3: -1.0}
        terms = [(c * special.gamma(j + 1) / special.gamma(j + 1 - alpha), j - alpha) for j, c in coeffs.items()]
        terms += [(lam * c, float(j)) for j, c in coeffs.items()]
        terms.append((lam * y0, 0.0))
        problem = FracOdeProblem(ScalarOdeData(alpha, lam, y0), PowerForcing(tuple(terms)))
        sol = solve(problem, 5)
        t = np.linspace(0, 1, 11)
        expected = y0 + sum(c * t ** j for j, c in coeffs.items())
        assert_allclose(sol(t), expected, atol=1e-10)

    def test_singular_system_reported(self):
        problem = FracOdeProblem(ScalarOdeData(0.5, 1.0, 1.0))
        with mock.patch('apps.frac_ode.services.linalg.solve', side_effect=linalg.LinAlgError('singular')):
            with self.assertRaises(NumericError):
                solve(problem, 3)

    def test_classical_order_rejected(self):
        with self.assertRaises(DomainError):
            FracOdeProblem(ScalarOdeData(1.0, 1.0, 1.0))


class ResidualTests(SimpleTestCase):

    def setUp(self):
        self.problem = FracOdeProblem(ScalarOdeData(0.3, 2.0, 1.0), CallableForcing(np.cos, left_power=0.5))

    def test_galerkin_solution(self):
        sol = solve(self.problem, 12)
        self.assertLessEqual(residual_check(self.problem, sol), 1e-10)

    def test_perturbed_solution(self):
        sol = solve(self.problem, 12)
        coeffs = np.array(sol.poly.coeffs)
        coeffs[3] += 1e-3
        perturbed = ScalarSpectralSolution(sol.offset, Expansion(sol.poly.weight, coeffs))
        self.assertGreater(residual_check(self.problem, perturbed), 1e-5)


class ForcingTests(SimpleTestCase):

    def test_power_forcing_moments_are_exact(self):
        forcing = PowerForcing(((2.0, -0.3), (1.0, 1.5)))
        moments = forcing.legendre_moments(0, 2.0)
        expected = 2.0 * 2.0 ** 0.7 / 0.7 + 2.0 ** 2.5 / 2.5
        assert_allclose(moments, [expected], rtol=1e-13)

    def test_callable_with_known_power_matches_power_forcing(self):
        power = PowerForcing(((1.0, 0.25),))
        wrapped = CallableForcing(np.ones_like, left_power=0.25)
        assert_allclose(wrapped.legendre_moments(10, 1.0), power.legendre_moments(10, 1.0), atol=1e-14)

    def test_modal_forcing_round_trip(self):
        moments = ConstantForcing(3.0).legendre_moments(4, 1.0)
        modal = ModalForcing(moments)
        assert_allclose(modal(np.array([0.2, 0.8])), 3.0)
        assert_allclose(modal.legendre_moments(2, 1.0), moments[:3])
        with self.assertRaises(DomainError):
            modal.legendre_moments(6, 1.0)

    def test_zero_forcing(self):
        assert_allclose(ZeroForcing().legendre_moments(3, 1.0), 0.0)

    def test_invalid_exponent_rejected(self):
        with self.assertRaises(DomainError):
            PowerForcing(((1.0, -1.0),))


class ModalSolveTests(SimpleTestCase):

    def test_batch_matches_individual_solves(self):
        alpha, M = 0.45, 8
        lams = np.array([0.0, 1.0, 9.87, 250.0])
        y0s = np.array([1.0, -0.5, 0.25, 2.0])
        rhs = np.zeros((lams.size, M + 1))
        rhs[:, 0] = 0.5 - lams * y0s
        batch = solve_modes(alpha, lams, rhs, M, max_workers=3)
        for n, lam in enumerate(lams):
            problem = FracOdeProblem(ScalarOdeData(alpha, lam, y0s[n]), ConstantForcing(0.5))
            assert_allclose(batch[n], solve(problem, M).poly.coeffs, rtol=1e-13, atol=1e-15)

    def test_shape_checked(self):
        with self.assertRaises(DomainError):
            solve_modes(0.5, [1.0, 2.0], np.zeros((3, 4)), 3)
