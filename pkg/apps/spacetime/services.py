"""
Método completo: descomposición modal en espacio y Galerkin espectral en tiempo.

Con Phi M-ortonormal, el sistema acoplado sobre P_M(0,T) x X_h

    (F kron M_h + M_time kron K_h) vec(W) = rhs

se diagonaliza en N - 1 EDOs fraccionarias escalares independientes con lambda = lambda_n^h.
"""

import logging

import numpy as np
from scipy import linalg

from apps.core.exceptions import DomainError, NumericError
from apps.core.models import SolverSettings
from apps.fem1d.models import Mesh1D, ModalBasis
from apps.fem1d.services import assemble_matrices, eig, load_vector, modal_coeffs
from apps.frac_ode.services import fractional_block, mass_diagonal, solve_modes
from apps.jacobi.models import JacobiWeight
from apps.jacobi.services import composite_rule, xi
from .models import ProblemSpec, SemidiscreteSolution, SpaceTimeSolution

logger = logging.getLogger(__name__)


def initial_modes(spec: ProblemSpec, basis: ModalBasis) -> np.ndarray:
    """y_{n,0} = <u0_h, phi_n^h>, coeficientes modales de la proyección L^2 de u0."""
    if spec.u0 is None:
        return np.zeros(basis.size)
    return basis.eigenvectors.T @ load_vector(basis.mesh, spec.u0, spec.u0_refine)


def forcing_modes(spec: ProblemSpec, basis: ModalBasis, M: int) -> np.ndarray:
    """<f_n, L_k>_{(0,T)} por modo: forma (n_modos, M + 1)."""
    return basis.eigenvectors.T @ spec.forcing.nodal_moments(basis.mesh, M, spec.T)


def solve(spec: ProblemSpec, M: int, mesh: Mesh1D, max_workers: int = None) -> SpaceTimeSolution:
    """
    Resuelve U en P_M(0,T) x X_h modo por modo.

    Args:
        spec: datos del problema
        M: grado temporal
        mesh: malla espacial; se retienen todos sus modos

    Returns:
        SpaceTimeSolution con offsets y_{n,0} y la parte polinomial de cada modo

    Raises:
        NumericError: si algún sistema modal es singular
    """
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    basis = eig(mesh)
    y0 = initial_modes(spec, basis)
    rhs = forcing_modes(spec, basis, M)
    rhs[:, 0] -= basis.eigenvalues * y0 * spec.T
    coeffs = solve_modes(spec.alpha, basis.eigenvalues, rhs, M, spec.T, max_workers)
    logger.info(f"Solved alpha={spec.alpha} with M={M} over {basis.size} modes (h={mesh.h:.3g})")
    return SpaceTimeSolution(basis, y0, coeffs, spec.T)


def semidiscrete_exact(spec: ProblemSpec, mesh: Mesh1D) -> SemidiscreteSolution:
    """
    Solución exacta en tiempo del problema espacialmente discreto.

    Sólo admite f nula o separable independiente del tiempo, f_n constante por modo.

    Raises:
        DomainError: si f depende del tiempo
    """
    if not spec.forcing.is_time_independent:
        raise DomainError(f"the semidiscrete solution needs a time-independent source, got {spec.forcing.tag!r}")
    basis = eig(mesh)
    # con f constante en t, el momento 0 es f_n * T
    f = forcing_modes(spec, basis, 0)[:, 0] / spec.T
    return SemidiscreteSolution(basis, spec.alpha, initial_modes(spec, basis), f, spec.T)


def evaluate(sol, x, t):
    """U(x, t) = sum_n y_n(t) phi_n^h(x); DomainError fuera de [0, 1] x [0, T]."""
    return sol(x, t)


def project_semidiscrete(exact: SemidiscreteSolution, degree: int = 200, levels: int = 20) -> SpaceTimeSolution:
    """
    Proyección de Legendre de grado `degree` de cada y_n - y_{n,0}.

    Las integrales usan la regla compuesta refinada hacia t = 0 por el término t^alpha.
    """
    cfg = SolverSettings.load()
    if not (0 <= degree <= cfg.max_degree):
        raise DomainError(f"reference degree must lie in [0, {cfg.max_degree}], got {degree}")
    legendre = JacobiWeight.legendre(exact.T)
    rule = composite_rule(legendre, degree + cfg.quad_extra_nodes, levels)
    values = exact.mode_values(rule.nodes) - exact.y0[:, None]
    V = legendre.vandermonde(degree, rule.nodes)
    coeffs = (values * rule.weights) @ V / xi(legendre, np.arange(degree + 1))
    logger.info(f"Projected the semidiscrete solution of {exact.basis.size} modes onto degree {degree}")
    return SpaceTimeSolution(exact.basis, exact.y0, coeffs, exact.T)


def _nodal_solution(sol: SpaceTimeSolution):
    """Coeficientes nodales: (u0_h en nodos, W de forma (M+1, n_dofs))."""
    Phi = sol.basis.eigenvectors
    return Phi @ sol.offsets, (Phi @ sol.coeffs).T


def _nodal_rhs(spec: ProblemSpec, mesh: Mesh1D, M: int, u0_nodal: np.ndarray) -> np.ndarray:
    _, stiffness = assemble_matrices(mesh)
    rhs = spec.forcing.nodal_moments(mesh, M, spec.T).T
    rhs[0] -= spec.T * (stiffness @ u0_nodal)
    return rhs


def galerkin_residual(spec: ProblemSpec, sol: SpaceTimeSolution) -> float:
    """
    max |a(U, L_k psi_l) - l(L_k psi_l)| / escala sobre todo P_M x X_h.

    En forma matricial el operador es F W M_h + M_time W K_h.
    """
    mesh = sol.mesh
    mass, stiffness = assemble_matrices(mesh)
    u0_nodal, W = _nodal_solution(sol)
    F = fractional_block(spec.alpha, sol.degree, spec.T)
    M_time = mass_diagonal(sol.degree, spec.T)
    operator = F @ (mass @ W.T).T + M_time[:, None] * (stiffness @ W.T).T
    rhs = _nodal_rhs(spec, mesh, sol.degree, u0_nodal)
    residual = np.max(np.abs(operator - rhs))
    scale = max(np.max(np.abs(rhs)), np.max(np.abs(operator)))
    return float(residual / scale) if scale else float(residual)


def solve_coupled(spec: ProblemSpec, M: int, mesh: Mesh1D) -> SpaceTimeSolution:
    """
    Ensambla y resuelve el sistema acoplado denso F kron M_h + M_time kron K_h.

    Sólo para instancias chicas: es el oráculo de la diagonalización modal.
    """
    n = mesh.n_dofs
    if (M + 1) * n > 4000:
        raise DomainError(f"the coupled system of size {(M + 1) * n} is too large for a dense solve")
    basis = eig(mesh)
    mass, stiffness = assemble_matrices(mesh)
    u0_nodal = basis.eigenvectors @ initial_modes(spec, basis)
    A = np.kron(fractional_block(spec.alpha, M, spec.T), mass.toarray())
    A += np.kron(np.diag(mass_diagonal(M, spec.T)), stiffness.toarray())
    rhs = _nodal_rhs(spec, mesh, M, u0_nodal)
    try:
        W = linalg.solve(A, rhs.ravel()).reshape(M + 1, n)
    except linalg.LinAlgError as exc:
        raise NumericError(f"coupled space-time system of size {A.shape[0]} is singular") from exc
    return SpaceTimeSolution(basis, modal_coeffs(basis, u0_nodal), modal_coeffs(basis, W.T), spec.T)
