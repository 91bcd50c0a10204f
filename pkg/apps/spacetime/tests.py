import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import special

from apps.core.exceptions import DomainError
from apps.fem1d.models import Mesh1D
from apps.fem1d.services import eig, interpolate, l2_project, load_vector
from apps.frac_ode.models import ConstantForcing, PowerForcing
from apps.frac_ode.services import l2_distance
from .data import example51, example52, example53, sine
from .models import CallableSpaceTimeForcing, ProblemSpec, SeparableForcing, SpaceTimeSolution
from .services import (
    evaluate,
    galerkin_residual,
    project_semidiscrete,
    semidiscrete_exact,
    solve,
    solve_coupled,
)


def bump(x):
    return x * (1 - x) * np.exp(x)


class ProblemSpecTests(SimpleTestCase):

    def test_classical_order_rejected(self):
        with self.assertRaises(DomainError):
            ProblemSpec(1.0, u0=sine, u0_tag='sine')

    def test_tags_must_match_data(self):
        with self.assertRaises(DomainError):
            ProblemSpec(0.5, u0=sine, u0_tag='zero')
        with self.assertRaises(DomainError):
            ProblemSpec(0.5, u0_tag='sine')
        with self.assertRaises(DomainError):
            SeparableForcing(sine, label='unknown')

    def test_catalogue_ranges(self):
        with self.assertRaises(DomainError):
            example51(0.5, -0.25)
        with self.assertRaises(DomainError):
            example52(0.5, 1.5, theta=2)
        with self.assertRaises(DomainError):
            example53(0.5, -0.6)


class SolveTests(SimpleTestCase):

    def test_zero_data_gives_zero_solution(self):
        mesh = Mesh1D.uniform(3)
        sol = solve(ProblemSpec(0.5), 5, mesh)
        assert_allclose(sol.offsets, 0.0)
        assert_allclose(sol.coeffs, 0.0)
        self.assertEqual(len(sol.modes), mesh.n_dofs)

    def test_first_mode_converges_to_mittag_leffler(self):
        alpha = 0.5
        mesh = Mesh1D.uniform(5)
        spec = example52(alpha, 0.0, theta=0)
        exact = semidiscrete_exact(spec, mesh)
        Ms = np.array([48, 64, 96, 128])
        errors = [l2_distance(solve(spec, M, mesh).modes[0], lambda t: exact.mode_values(t)[0]) for M in Ms]
        slope = np.polyfit(np.log(Ms), np.log(errors), 1)[0]
        self.assertAlmostEqual(slope, -1 - 2 * alpha, delta=0.2)

    def test_modal_route_matches_coupled_system(self):
        mesh = Mesh1D.uniform(3)
        forcing = CallableSpaceTimeForcing(lambda x, t: bump(x) * (1 + t) + np.cos(3 * x) * t ** 2)
        spec = ProblemSpec(0.6, u0=bump, u0_tag='custom', forcing=forcing)
        modal = solve(spec, 4, mesh)
        coupled = solve_coupled(spec, 4, mesh)
        assert_allclose(modal.offsets, coupled.offsets, atol=1e-10)
        assert_allclose(modal.coeffs, coupled.coeffs, atol=1e-10)

    def test_coupled_oracle_limited_to_small_instances(self):
        with self.assertRaises(DomainError):
            solve_coupled(ProblemSpec(0.5), 40, Mesh1D.uniform(8))

    def test_galerkin_orthogonality(self):
        spec = example53(0.5, 0.5)
        sol = solve(spec, 6, Mesh1D.uniform(4))
        self.assertLessEqual(galerkin_residual(spec, sol), 1e-9)

    def test_modal_energy_bounded_by_data(self):
        spec = example52(0.5, 1.5, theta=1)
        u0_norm_sq = 1.0 / 30.0
        for level in (3, 4, 5, 6):
            sol = solve(spec, 16, Mesh1D.uniform(level))
            energy = np.sum(sol.basis.eigenvalues * sol.time_l2_squared())
            self.assertLessEqual(energy, u0_norm_sq)

    def test_manufactured_solution_recovered(self):
        beta = 0.75
        sol = solve(example51(0.5, beta), 32, Mesh1D.uniform(6))
        self.assertAlmostEqual(evaluate(sol, 0.5, 0.5), 0.5 ** beta, delta=5e-3)


class SemidiscreteTests(SimpleTestCase):

    def setUp(self):
        self.mesh = Mesh1D.uniform(5)
        self.spec = example52(0.5, 0.0, theta=0)
        self.exact = semidiscrete_exact(self.spec, self.mesh)

    def test_initial_time_reproduces_projection(self):
        x = self.mesh.interior
        assert_allclose(self.exact(x, np.zeros_like(x)), l2_project(self.mesh, sine), atol=1e-13)

    def test_half_order_closed_form(self):
        basis = eig(self.mesh)
        nodal_modes = np.array([interpolate(self.mesh, basis.eigenvectors[:, n], 0.5) for n in range(basis.size)])
        expected = np.sum(self.exact.y0 * special.erfcx(basis.eigenvalues) * nodal_modes)
        self.assertAlmostEqual(evaluate(self.exact, 0.5, 1.0), expected, delta=1e-11)
        self.assertAlmostEqual(evaluate(self.exact, 0.5, 1.0), special.erfcx(basis.eigenvalues[0]), delta=1e-3)

    def test_linear_in_initial_data(self):
        doubled = semidiscrete_exact(self.spec.scaled_initial(2.0), self.mesh)
        x, t = np.meshgrid(np.linspace(0, 1, 7), np.linspace(0, 1, 5))
        assert_allclose(doubled(x, t), 2 * self.exact(x, t), rtol=1e-13, atol=1e-15)

    def test_time_dependent_source_rejected(self):
        with self.assertRaises(DomainError):
            semidiscrete_exact(example51(0.5, 0.75), self.mesh)
        with self.assertRaises(DomainError):
            semidiscrete_exact(ProblemSpec(0.5, forcing=CallableSpaceTimeForcing(lambda x, t: x * t)), self.mesh)

    def test_constant_source_modes(self):
        spec = ProblemSpec(0.5, forcing=SeparableForcing(bump, ConstantForcing(2.0)))
        exact = semidiscrete_exact(spec, self.mesh)
        basis = eig(self.mesh)
        mass_projection = basis.eigenvectors.T @ load_vector(self.mesh, bump)
        assert_allclose(exact.f, 2.0 * mass_projection, rtol=1e-12, atol=1e-16)
        assert_allclose(exact.y0, 0.0)
        sol = solve(spec, 48, self.mesh)
        self.assertLessEqual(l2_distance(sol.modes[0], lambda t: exact.mode_values(t)[0]), 1e-4)

    def test_projected_reference_is_close(self):
        reference = project_semidiscrete(self.exact, degree=120, levels=12)
        t = np.linspace(0.05, 1.0, 9)
        assert_allclose(reference.mode_values(t)[:3], self.exact.mode_values(t)[:3], atol=1e-3)


class EvaluateTests(SimpleTestCase):

    def setUp(self):
        self.mesh = Mesh1D.uniform(4)
        self.sol = solve(example53(0.5, 0.8), 6, self.mesh)

    def test_dirichlet_boundary(self):
        assert_allclose(evaluate(self.sol, np.array([0.0, 1.0]), np.array([0.3, 0.9])), 0.0, atol=1e-15)

    def test_out_of_domain(self):
        with self.assertRaises(DomainError):
            evaluate(self.sol, 1.2, 0.5)
        with self.assertRaises(DomainError):
            evaluate(self.sol, 0.5, -0.1)

    def test_matches_nodal_summation(self):
        rng = np.random.default_rng(11)
        x, t = rng.uniform(0, 1, 20), rng.uniform(0, 1, 20)
        Phi = self.sol.basis.eigenvectors
        expected = [
            sum(mode(tp) * interpolate(self.mesh, Phi[:, n], xp) for n, mode in enumerate(self.sol.modes))
            for xp, tp in zip(x, t)
        ]
        assert_allclose(evaluate(self.sol, x, t), expected, atol=1e-12)

    def test_initial_offsets_at_nodes(self):
        spec = example52(0.5, 0.0, theta=0)
        sol = solve(spec, 4, self.mesh)
        frozen = SpaceTimeSolution(sol.basis, sol.offsets, np.zeros_like(sol.coeffs))
        x = self.mesh.interior
        assert_allclose(frozen(x, np.zeros_like(x)), l2_project(self.mesh, sine), atol=1e-13)

    def test_difference_requires_same_mesh(self):
        other = solve(example53(0.5, 0.8), 6, Mesh1D.uniform(3))
        with self.assertRaises(DomainError):
            self.sol - other
        assert_allclose((self.sol - self.sol).coeffs, 0.0)

    def test_power_forcing_in_time(self):
        spec = ProblemSpec(0.4, forcing=SeparableForcing(bump, PowerForcing(((1.0, 0.3),))))
        sol = solve(spec, 5, self.mesh)
        self.assertLessEqual(galerkin_residual(spec, sol), 1e-9)
