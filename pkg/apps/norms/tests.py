import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import special

from apps.core.exceptions import DegenerateFitError, DomainError
from apps.fem1d.models import Mesh1D, ModalBasis
from apps.fem1d.services import assemble_matrices, eig
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import frac_pairing, pairing_diagonal, project, xi
from apps.jacobi.tests import rl_left_derivative, rl_right_derivative
from apps.special_fn.models import ScalarOdeData
from apps.special_fn.services import exact_homogeneous
from apps.spacetime.models import SpaceTimeSolution
from .models import BesovSpec, ErrorReport, RateFit
from .serializers import report_from_csv, report_to_csv, report_to_dat, summary_to_csv
from .services import (
    besov_norm,
    decay_fit,
    err_HalphaL2,
    err_L2H1,
    err_L2L2,
    halpha_norm,
    projection_errors,
    rate_fit,
    seminorm_squared,
    x_norm,
)


def random_difference(level=3, degree=5, seed=0):
    mesh = Mesh1D.uniform(level)
    basis = eig(mesh)
    rng = np.random.default_rng(seed)
    return SpaceTimeSolution(basis, rng.standard_normal(basis.size), rng.standard_normal((basis.size, degree + 1)))


def single_mode(offset, coeffs, eigenvalue=4.0):
    basis = ModalBasis(Mesh1D.uniform(1), np.array([eigenvalue]), np.array([[1.0]]))
    return SpaceTimeSolution(basis, [offset], [coeffs])


def seminorm_by_quadrature(poly, alpha, n=40):
    theta = alpha / 2
    x, w = special.roots_jacobi(n, -theta, -theta)
    t = 0.5 * (x + 1)
    w = w * 0.5 ** (1 - alpha)
    left = np.array([s ** theta * rl_left_derivative(poly, theta, s) for s in t])
    right = np.array([(1 - s) ** theta * rl_right_derivative(poly, theta, s, 1.0) for s in t])
    return np.sum(w * left * right) / math.cos(theta * math.pi)


class EnergyNormTests(SimpleTestCase):

    def test_identical_solutions(self):
        diff = random_difference()
        zero = diff - diff
        self.assertEqual(err_L2H1(zero, zero.mesh), 0.0)
        self.assertEqual(err_HalphaL2(zero, zero.mesh, 0.5), 0.0)

    def test_single_legendre_mode(self):
        diff = single_mode(0.0, [0.0, 1.0])
        self.assertAlmostEqual(err_L2H1(diff, diff.mesh), 2 / math.sqrt(3), places=14)

    def test_against_time_quadrature(self):
        diff = random_difference(seed=3)
        mesh = diff.mesh
        _, stiffness = assemble_matrices(mesh)
        x, w = np.polynomial.legendre.leggauss(30)
        t, w = 0.5 * (x + 1), 0.5 * w
        nodal = diff.basis.eigenvectors @ diff.mode_values(t)
        energy = sum(wq * nodal[:, q] @ (stiffness @ nodal[:, q]) for q, wq in enumerate(w))
        self.assertAlmostEqual(err_L2H1(diff, mesh) / math.sqrt(energy), 1.0, delta=1e-10)
        l2 = sum(np.sum(diff.mode_values(t) ** 2 * w, axis=1))
        self.assertAlmostEqual(err_L2L2(diff, mesh) / math.sqrt(l2), 1.0, delta=1e-10)

    def test_mesh_mismatch(self):
        diff = random_difference()
        with self.assertRaises(DomainError):
            err_L2H1(diff, Mesh1D.uniform(4))
        with self.assertRaises(DomainError):
            err_HalphaL2(diff, Mesh1D.uniform(2), 0.5)


class FractionalNormTests(SimpleTestCase):

    def test_constant_difference(self):
        alpha, c = 0.4, 1.7
        diff = single_mode(c, [0.0])
        d0 = pairing_diagonal(alpha, 0)[0]
        assert_allclose(seminorm_squared(diff, alpha), c ** 2 * d0 / math.cos(alpha * math.pi / 2), rtol=1e-13)
        assert_allclose(err_HalphaL2(diff, diff.mesh, alpha) ** 2, c ** 2 + c ** 2 * d0 / math.cos(alpha * math.pi / 2),
                        rtol=1e-13)

    def test_against_singular_quadrature(self):
        alpha = 0.6
        rng = np.random.default_rng(5)
        coeffs, offset = rng.standard_normal(6), rng.standard_normal()
        diff = single_mode(offset, coeffs)
        series = np.array(coeffs)
        series[0] += offset
        poly = np.polynomial.Legendre(series, domain=[0, 1])
        assert_allclose(seminorm_squared(diff, alpha), seminorm_by_quadrature(poly, alpha), rtol=1e-8)

    def test_norm_axioms(self):
        alpha = 0.5
        a, b = random_difference(seed=1), random_difference(seed=2)
        mesh = a.mesh
        for norm in (lambda d: err_L2H1(d, mesh), lambda d: err_HalphaL2(d, mesh, alpha)):
            self.assertAlmostEqual(norm(-2.5 * a), 2.5 * norm(a), delta=1e-12 * norm(a))
            self.assertLessEqual(norm(a - (-1.0 * b)), norm(a) + norm(b) + 1e-12)

    def test_scalar_norm_matches_single_mode(self):
        alpha = 0.45
        coeffs = np.array([0.3, -1.2, 0.5, 0.25])
        diff = single_mode(0.0, coeffs)
        e = Expansion(JacobiWeight.legendre(), coeffs)
        self.assertAlmostEqual(halpha_norm(e, alpha), err_HalphaL2(diff, diff.mesh, alpha), delta=1e-12)
        with self.assertRaises(DomainError):
            halpha_norm(Expansion(JacobiWeight(-alpha, 0.0), coeffs), alpha)

    def test_full_norm_dominates_l2_part(self):
        diff = random_difference(seed=7)
        self.assertGreaterEqual(err_HalphaL2(diff, diff.mesh, 0.3), err_L2L2(diff, diff.mesh))

    def test_energy_norm_composition(self):
        alpha = 0.35
        diff = random_difference(level=2, degree=4, seed=8)
        seminorm = 0.0
        for mode in diff.modes:
            p = mode.poly + Expansion(mode.poly.weight, [mode.offset])
            seminorm += frac_pairing(p, p, alpha) / math.cos(alpha * math.pi / 2)
        direct = math.sqrt(seminorm + np.sum(diff.basis.eigenvalues * diff.time_l2_squared()))
        self.assertAlmostEqual(x_norm(diff, diff.mesh, alpha), direct, delta=1e-12 * direct)


class BesovTests(SimpleTestCase):

    def test_zero_smoothness(self):
        weight = JacobiWeight(-0.4, 0.0)
        e = Expansion(weight, [0.3, -1.0, 0.5, 0.25])
        weighted_l2 = math.sqrt(np.sum(xi(weight, np.arange(4)) * e.coeffs ** 2))
        self.assertAlmostEqual(besov_norm(e, 0.0), math.sqrt(2) * weighted_l2, places=13)

    def test_constant(self):
        weight = JacobiWeight(-0.7, 0.0)
        e = Expansion(weight, [-3.0])
        self.assertAlmostEqual(besov_norm(e, 0.0), math.sqrt(2 * xi(weight, 0)) * 3.0, places=13)
        self.assertAlmostEqual(besov_norm(e, 1.4), math.sqrt(2 * xi(weight, 0)) * 3.0, places=13)

    def test_monotone_in_smoothness(self):
        e = Expansion(JacobiWeight(-0.5, 0.0), 1.0 / np.arange(1, 30) ** 2)
        norms = [besov_norm(e, g) for g in (0.0, 0.5, 1.0, 1.5)]
        self.assertTrue(np.all(np.diff(norms) > 0))

    def test_dominant_constant_mode_is_continuous_at_zero(self):
        e = Expansion(JacobiWeight(-0.5, 0.0), [5.0, 0.01, 0.01])
        norms = [besov_norm(e, g) for g in (0.0, 1e-3, 0.1, 0.5)]
        self.assertTrue(np.all(np.diff(norms) >= 0))
        self.assertAlmostEqual(norms[0], norms[1], delta=1e-6 * norms[0])

    def test_negative_smoothness_rejected(self):
        with self.assertRaises(DomainError):
            besov_norm(Expansion(JacobiWeight(-0.5, 0.0), [1.0]), -0.5)
        with self.assertRaises(DomainError):
            BesovSpec(-1.0, 0.5)

    def test_mittag_leffler_regularity_threshold(self):
        alpha = 0.5
        spec = BesovSpec(1 + 2 * alpha, alpha)
        data = ScalarOdeData(alpha, 1.0, 1.0)
        y = project(lambda t: exact_homogeneous(data, t), spec.weight, 200, composite=True)

        def increment_ratio(gamma):
            # (||y_200||^2 - ||y_100||^2) / (||y_100||^2 - ||y_50||^2): < 1 si la serie converge
            squares = [besov_norm(y.truncated(n), gamma) ** 2 for n in (50, 100, 200)]
            return (squares[2] - squares[1]) / (squares[1] - squares[0])

        self.assertLess(increment_ratio(spec.gamma - 0.2), 0.9)
        self.assertGreater(increment_ratio(spec.gamma + 0.2), 1.1)


class DecayFitTests(SimpleTestCase):

    def test_synthetic_power(self):
        k = np.arange(1, 61, dtype=float)
        e = Expansion(JacobiWeight(-0.5, 0.0), np.concatenate(([1.0], k ** -3.0)))
        self.assertAlmostEqual(decay_fit(e, 10, 60), -3.0, delta=0.01)

    def test_mittag_leffler_pairings(self):
        alpha = 0.5
        data = ScalarOdeData(alpha, 1.0, 1.0)
        e = project(lambda t: exact_homogeneous(data, t), JacobiWeight(-alpha, 0.0), 80, composite=True)
        self.assertAlmostEqual(decay_fit(e, 10, 60, use_pairings=True), -2 - 2 * alpha, delta=0.2)

    def test_leading_singular_term(self):
        alpha = 0.4
        e = project(np.ones_like, JacobiWeight(-alpha, 0.0), 80, left_power=alpha)
        self.assertAlmostEqual(decay_fit(e, 10, 60, use_pairings=True), -2 - 2 * alpha, delta=0.2)

    def test_degenerate_inputs(self):
        e = Expansion(JacobiWeight(-0.5, 0.0), np.concatenate(([1.0, 0.5], np.zeros(40))))
        with self.assertRaises(DegenerateFitError):
            decay_fit(e, 10, 40)
        with self.assertRaises(DegenerateFitError):
            decay_fit(e, 10, 15)


class RateFitTests(SimpleTestCase):

    def test_exact_power_law(self):
        Ms = np.array([8, 12, 16, 24, 32, 48, 64])
        fit = rate_fit(Ms, 7.0 * Ms ** -2.0)
        self.assertIsInstance(fit, RateFit)
        self.assertAlmostEqual(fit.slope, -2.0, delta=0.01)
        self.assertAlmostEqual(fit.intercept, math.log(7.0), places=10)
        self.assertLess(fit.residual, 1e-12)

    def test_floor_points_excluded(self):
        Ms = np.array([4, 8, 16, 32, 64, 128, 256, 8192, 16384])
        fit = rate_fit(Ms, np.maximum(Ms ** -3.0, 1e-12))
        self.assertAlmostEqual(fit.slope, -3.0, delta=0.05)
        self.assertEqual(fit.points, 7)

    def test_too_few_points(self):
        with self.assertRaises(DegenerateFitError):
            rate_fit([8, 16, 32, 64], [1e-3, 1e-4, 1e-12, 1e-13])

    def test_tail_fits_asymptotic_points_only(self):
        Ms = np.array([8, 12, 16, 24, 32, 48, 64, 8192])
        errors = np.where(Ms < 24, 1e-2, 5.0 * Ms ** -2.0)
        errors[-1] = 0.0
        full = rate_fit(Ms, errors)
        tail = rate_fit(Ms, errors, tail=4)
        self.assertAlmostEqual(tail.slope, -2.0, places=10)
        self.assertEqual(tail.points, 4)
        self.assertGreater(full.slope, -1.9)

    def test_short_tail_rejected(self):
        with self.assertRaises(DomainError):
            rate_fit([8, 16, 32, 64], [1e-1, 1e-2, 1e-3, 1e-4], tail=3)


class ProjectionErrorTests(SimpleTestCase):

    def test_homogeneous_solution_rates(self):
        alpha = 0.5
        data = ScalarOdeData(alpha, 1.0, 1.0)
        Ms = np.array([8, 12, 16, 24, 32, 48])
        rows = projection_errors(lambda t: exact_homogeneous(data, t), alpha, Ms, reference_degree=160)
        self.assertEqual([row.M for row in rows], list(Ms))
        l2_slope = rate_fit(Ms, [row.weighted_l2 for row in rows]).slope
        semi_slope = rate_fit(Ms, [row.seminorm for row in rows]).slope
        self.assertAlmostEqual(l2_slope, -1 - 2 * alpha, delta=0.15)
        self.assertAlmostEqual(semi_slope, alpha - 1 - 2 * alpha, delta=0.15)

    def test_degree_checked(self):
        with self.assertRaises(DomainError):
            projection_errors(np.cos, 0.5, [8, 200], reference_degree=100)


class ErrorReportTests(SimpleTestCase):

    def setUp(self):
        self.report = ErrorReport(
            alpha=0.5, param=0.75, h=2.0 ** -10,
            Ms=(8, 16, 32, 64), E1=(1e-2, 2e-3, 4e-4, 8e-5), E2=(3e-2, 8e-3, 2e-3, 5e-4),
        )

    def test_csv_header_and_round_trip(self):
        text = report_to_csv(self.report)
        self.assertEqual(text.splitlines()[0], 'M,h,alpha,param,E1,E2')
        self.assertEqual(report_from_csv(text), self.report)
        self.assertEqual(report_to_csv(report_from_csv(text)), text)

    def test_optional_l2_column(self):
        report = ErrorReport(0.4, 0.0, 0.01, (8, 16), (1.0, 0.5), (2.0, 1.0), L2L2=(0.1, 0.05))
        self.assertEqual(report_to_csv(report).splitlines()[0], 'M,h,alpha,param,E1,E2,L2L2')
        self.assertEqual(report_from_csv(report_to_csv(report)).L2L2, (0.1, 0.05))

    def test_dat_lines(self):
        lines = report_to_dat(self.report).splitlines()
        self.assertTrue(lines[0].startswith('# alpha=0.5'))
        self.assertEqual(len([line for line in lines if not line.startswith('#')]), 4)

    def test_invariants(self):
        with self.assertRaises(DomainError):
            ErrorReport(0.5, 0.0, 0.1, (16, 8), (1.0, 1.0), (1.0, 1.0))
        with self.assertRaises(DomainError):
            ErrorReport(0.5, 0.0, 0.1, (8, 16), (1.0, -1.0), (1.0, 1.0))
        with self.assertRaises(DomainError):
            ErrorReport(0.5, 0.0, 0.1, (8, 16), (1.0,), (1.0, 1.0))

    def test_invalid_csv(self):
        with self.assertRaises(DomainError):
            report_from_csv('M,h,alpha,param,E1,E2\n8,0.1,0.5,0.0,abc,1.0\n')

    def test_summary(self):
        text = summary_to_csv([
            dict(alpha=0.5, param=0.75, norm='E1', slope=-2.49, predicted=-2.5, tolerance=0.15, ok=True),
        ])
        self.assertEqual(text.splitlines()[0], 'alpha,param,norm,slope,predicted,tolerance,ok')
        self.assertEqual(text.splitlines()[1], '0.5,0.75,E1,-2.490000,-2.500000,0.15,true')
