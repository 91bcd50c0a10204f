import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from apps.core.exceptions import DomainError
from .models import Mesh1D, SpatialFunction
from .services import (
    assemble_matrices,
    eig,
    from_modal,
    interpolate,
    l2_error,
    l2_project,
    load_vector,
    modal_coeffs,
)


def random_mesh(n_elements: int, seed: int = 0) -> Mesh1D:
    rng = np.random.default_rng(seed)
    inner = np.sort(rng.uniform(0.02, 0.98, n_elements - 1))
    return Mesh1D(np.concatenate(([0.0], inner, [1.0])))


class MeshTests(SimpleTestCase):

    def test_uniform_mesh(self):
        mesh = Mesh1D.uniform(3)
        self.assertEqual(mesh.n_dofs, 7)
        self.assertAlmostEqual(mesh.h, 0.125)

    def test_invalid_meshes_rejected(self):
        for nodes in ([0.0, 1.0], [0.0, 0.6, 0.4, 1.0], [0.1, 0.5, 1.0], [0.0, 0.5, 0.9]):
            with self.assertRaises(DomainError):
                Mesh1D(np.array(nodes))
        with self.assertRaises(DomainError):
            Mesh1D.uniform(0)

    def test_nodes_are_read_only(self):
        mesh = Mesh1D.uniform(2)
        with self.assertRaises(ValueError):
            mesh.nodes[1] = 0.3


class AssemblyTests(SimpleTestCase):

    def test_single_interior_dof(self):
        mass, stiffness = assemble_matrices(Mesh1D.uniform(1))
        assert_allclose(stiffness.toarray(), [[4.0]])
        assert_allclose(mass.toarray(), [[1.0 / 3.0]])

    def test_uniform_rows(self):
        h = 1.0 / 16
        mass, stiffness = assemble_matrices(Mesh1D.uniform(4))
        K, M = stiffness.toarray(), mass.toarray()
        assert_allclose(K[5, 4:7], np.array([-1.0, 2.0, -1.0]) / h)
        assert_allclose(M[5, 4:7], np.array([1.0, 4.0, 1.0]) * h / 6)
        assert_allclose(K[1:-1].sum(axis=1), 0.0, atol=1e-10)

    def test_energy_matches_elementwise_integration(self):
        mesh = random_mesh(23)
        v = np.random.default_rng(1).standard_normal(mesh.n_dofs)
        mass, stiffness = assemble_matrices(mesh)
        full = np.concatenate(([0.0], v, [0.0]))
        slopes = np.diff(full) / mesh.sizes
        self.assertAlmostEqual(v @ (stiffness @ v), np.sum(slopes ** 2 * mesh.sizes), delta=1e-12 * np.sum(slopes ** 2))
        a, b = full[:-1], full[1:]
        exact_mass = np.sum(mesh.sizes * (a ** 2 + a * b + b ** 2) / 3.0)
        assert_allclose(v @ (mass @ v), exact_mass, rtol=1e-12)


class EigenTests(SimpleTestCase):

    def test_uniform_closed_form(self):
        level = 5
        h = 2.0 ** -level
        basis = eig(Mesh1D.uniform(level))
        n = np.arange(1, basis.size + 1)
        expected = (6 / h ** 2) * (1 - np.cos(n * np.pi * h)) / (2 + np.cos(n * np.pi * h))
        assert_allclose(basis.eigenvalues, expected, rtol=1e-9)

    def test_first_eigenvalue_limit(self):
        basis = eig(Mesh1D.uniform(7))
        self.assertAlmostEqual(basis.eigenvalues[0] / np.pi ** 2, 1.0, delta=0.01)

    def test_mass_orthonormal_eigenpairs(self):
        mesh = random_mesh(40, seed=3)
        basis = eig(mesh)
        mass, stiffness = assemble_matrices(mesh)
        Phi = basis.eigenvectors
        assert_allclose(Phi.T @ (mass @ Phi), np.eye(basis.size), atol=1e-10)
        assert_allclose(stiffness @ Phi, (mass @ Phi) * basis.eigenvalues, atol=1e-8 * basis.eigenvalues[-1])
        self.assertTrue(np.all(Phi[0] > 0))

    def test_bounded_below_by_continuum(self):
        basis = eig(Mesh1D.uniform(6))
        n = np.arange(1, basis.size + 1)
        self.assertTrue(np.all(basis.eigenvalues >= (n * np.pi) ** 2 * (1 - 1e-12)))
        self.assertTrue(np.all(np.diff(basis.eigenvalues) > 0))

    def test_refinement_quadruples_spectrum(self):
        coarse = eig(Mesh1D.uniform(5)).eigenvalues[-1]
        fine = eig(Mesh1D.uniform(6)).eigenvalues[-1]
        self.assertAlmostEqual(fine / coarse, 4.0, delta=0.08)


class ProjectionTests(SimpleTestCase):

    def test_piecewise_linear_reproduced(self):
        mesh = random_mesh(17, seed=5)
        v = np.random.default_rng(6).standard_normal(mesh.n_dofs)
        assert_allclose(l2_project(mesh, lambda x: interpolate(mesh, v, x)), v, atol=1e-12)

    def test_sine_aligns_with_first_mode(self):
        mesh = Mesh1D.uniform(8)
        coeffs = modal_coeffs(eig(mesh), l2_project(mesh, lambda x: np.sin(np.pi * x)))
        self.assertLessEqual(np.max(np.abs(coeffs[1:])), 1e-3 * abs(coeffs[0]))

    def test_second_order_convergence(self):
        def f(x):
            return x * (1 - x) * np.exp(x)
        levels = np.arange(3, 8)
        errors = [l2_error(Mesh1D.uniform(k), l2_project(Mesh1D.uniform(k), f), f) for k in levels]
        slope = np.polyfit(np.log(2.0 ** -levels), np.log(errors), 1)[0]
        self.assertAlmostEqual(slope, 2.0, delta=0.1)

    def test_known_endpoint_power(self):
        sigma, mesh = -0.3, Mesh1D.uniform(4)
        h = mesh.h
        b = load_vector(mesh, SpatialFunction(np.ones_like, left_power=sigma))
        first = h ** (sigma + 1) / (sigma + 2)
        second = (2 * (2 * h) ** (sigma + 1) - 2 * h ** (sigma + 1)) / (sigma + 1) \
            - ((2 * h) ** (sigma + 2) - h ** (sigma + 2)) / (h * (sigma + 2))
        assert_allclose(b[0], first + second, rtol=1e-10)

    def test_right_power_mirrors_left(self):
        mesh = Mesh1D.uniform(5)
        left = load_vector(mesh, SpatialFunction(np.ones_like, left_power=0.7))
        right = load_vector(mesh, SpatialFunction(np.ones_like, right_power=0.7))
        assert_allclose(right, left[::-1], rtol=1e-12)

    def test_geometric_refinement_matches_known_power(self):
        mesh = Mesh1D.uniform(4)
        known = load_vector(mesh, SpatialFunction(lambda x: 1 - x, left_power=-0.3))
        refined = load_vector(mesh, lambda x: x ** -0.3 * (1 - x), refine=True)
        assert_allclose(refined, known, atol=1e-10)

    def test_invalid_power_rejected(self):
        with self.assertRaises(DomainError):
            SpatialFunction(np.ones_like, left_power=-1.0)


class ModalTests(SimpleTestCase):

    def setUp(self):
        self.mesh = random_mesh(30, seed=9)
        self.basis = eig(self.mesh)
        self.mass, self.stiffness = assemble_matrices(self.mesh)

    def test_eigenvector_maps_to_unit_vector(self):
        n = 4
        assert_allclose(modal_coeffs(self.basis, self.basis.eigenvectors[:, n]), np.eye(self.basis.size)[n], atol=1e-11)

    def test_round_trip(self):
        v = np.random.default_rng(2).standard_normal(self.basis.size)
        assert_allclose(from_modal(self.basis, modal_coeffs(self.basis, v)), v, atol=1e-11)

    def test_parseval_and_energy(self):
        v = np.random.default_rng(4).standard_normal(self.basis.size)
        c = modal_coeffs(self.basis, v)
        assert_allclose(np.sum(c ** 2), v @ (self.mass @ v), rtol=1e-11)
        assert_allclose(np.sum(self.basis.eigenvalues * c ** 2), v @ (self.stiffness @ v), rtol=1e-11)

    def test_shape_checked(self):
        with self.assertRaises(DomainError):
            modal_coeffs(self.basis, np.zeros(self.basis.size + 1))

    def test_interpolation_domain(self):
        with self.assertRaises(DomainError):
            interpolate(self.mesh, np.zeros(self.basis.size), [1.5])
