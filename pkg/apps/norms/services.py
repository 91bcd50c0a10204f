"""
Normas de error espacio-temporales, normas de Besov y ajustes de tasas.

    E1 = ||d||_{L^2(0,T; H^1_0)}    = sqrt(sum_n lambda_n^h int_0^T d_n^2)
    E2 = ||d||_{H^{alpha/2}(0,T; L^2)} = sqrt(sum_n ||d_n||^2_{L^2} + sec(alpha pi/2) <D^{alpha/2}_{0+} d_n, D^{alpha/2}_{T-} d_n>)

Todo es exacto para diferencias polinomio + constante por modo.
"""

import logging
import math
from typing import Callable, List, Sequence

import numpy as np

from apps.core.exceptions import DegenerateFitError, DomainError
from apps.core.models import SolverSettings
from apps.fem1d.models import Mesh1D
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import basis_change_matrix, frac_pairing, pairing_diagonal, project, xi
from apps.spacetime.models import SpaceTimeSolution
from .models import ProjectionErrorRow, RateFit

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4
MIN_DECAY_SPAN = 8


def _check_mesh(diff: SpaceTimeSolution, mesh: Mesh1D) -> None:
    if not diff.mesh.same_as(mesh):
        raise DomainError("the difference was computed on another mesh")


def _check_order(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def err_L2H1(diff: SpaceTimeSolution, mesh: Mesh1D) -> float:
    """E1: los cruces offset x L_0 entran en time_l2_squared."""
    _check_mesh(diff, mesh)
    total = np.sum(diff.basis.eigenvalues * diff.time_l2_squared())
    return math.sqrt(max(float(total), 0.0))


def err_L2L2(diff: SpaceTimeSolution, mesh: Mesh1D) -> float:
    _check_mesh(diff, mesh)
    return math.sqrt(max(float(np.sum(diff.time_l2_squared())), 0.0))


def seminorm_squared(diff: SpaceTimeSolution, alpha: float) -> float:
    """
    sum_n sec(alpha pi/2) <D^{alpha/2}_{0+} d_n, D^{alpha/2}_{T-} d_n>.

    El offset constante se suma al coeficiente de L_0 = 1 antes de reexpandir
    en S^{-alpha,0} y S^{0,-alpha}.
    """
    _check_order(alpha)
    T, degree = diff.T, diff.degree
    full = np.array(diff.coeffs)
    full[:, 0] += diff.offsets
    legendre = JacobiWeight.legendre(T)
    left = full @ basis_change_matrix(legendre, JacobiWeight(-alpha, 0.0, T), degree).T
    right = full @ basis_change_matrix(legendre, JacobiWeight(0.0, -alpha, T), degree).T
    pairing = np.sum(left * right * pairing_diagonal(alpha, degree, T))
    return max(float(pairing), 0.0) / math.cos(0.5 * alpha * math.pi)


def err_HalphaL2(diff: SpaceTimeSolution, mesh: Mesh1D, alpha: float) -> float:
    """E2 como norma completa: L^2 más seminorma."""
    _check_mesh(diff, mesh)
    l2 = float(np.sum(diff.time_l2_squared()))
    return math.sqrt(max(l2, 0.0) + seminorm_squared(diff, alpha))


def x_norm(diff: SpaceTimeSolution, mesh: Mesh1D, alpha: float) -> float:
    """Norma de energía (|d|^2_{H^{alpha/2}(0,T;L^2)} + ||d||^2_{L^2(0,T;H^1_0)})^{1/2}."""
    return math.sqrt(seminorm_squared(diff, alpha) + err_L2H1(diff, mesh) ** 2)


def halpha_norm(e: Expansion, alpha: float) -> float:
    """||p||_{H^{alpha/2}(0,T)} de un polinomio escalar en base de Legendre."""
    _check_order(alpha)
    if not e.weight.is_legendre:
        raise DomainError("halpha_norm expects a Legendre expansion")
    l2 = float(np.sum(xi(e.weight, np.arange(e.degree + 1)) * e.coeffs ** 2))
    seminorm_sq = frac_pairing(e, e, alpha) / math.cos(0.5 * alpha * math.pi)
    return math.sqrt(max(l2, 0.0) + max(seminorm_sq, 0.0))


def besov_norm(e: Expansion, gamma: float) -> float:
    """
    sqrt(sum_k (1 + k^{2 gamma}) xi_k v_k^2) en la base de e.

    El término k = 0 pesa 2 para todo gamma.
    """
    if not gamma >= 0:
        raise DomainError(f"Besov smoothness must be nonnegative, got {gamma}")
    k = np.arange(e.degree + 1, dtype=float)
    growth = np.ones_like(k)
    growth[1:] = k[1:] ** (2.0 * gamma)
    return math.sqrt(float(np.sum((1.0 + growth) * xi(e.weight, k) * e.coeffs ** 2)))


def decay_fit(e: Expansion, k_min: int, k_max: int, use_pairings: bool = False) -> float:
    """
    Pendiente de log|c_k| contra log k en [k_min, k_max].

    Args:
        use_pairings: ajustar los pares <y, S_k>_mu = xi_k v_k en lugar de los
            coeficientes v_k; con pesos de Jacobi los primeros decaen como k^{-1} más rápido

    Raises:
        DegenerateFitError: rango menor que 8 o menos de 4 coeficientes no nulos
    """
    if k_max < k_min + MIN_DECAY_SPAN:
        raise DegenerateFitError(f"decay fits need k_max >= k_min + {MIN_DECAY_SPAN}, got [{k_min}, {k_max}]")
    if k_max > e.degree:
        raise DomainError(f"k_max={k_max} exceeds the expansion degree {e.degree}")
    k = np.arange(max(k_min, 1), k_max + 1)
    values = e.coeffs[k]
    if use_pairings:
        values = values * xi(e.weight, k)
    keep = values != 0
    if np.count_nonzero(keep) < MIN_FIT_POINTS:
        raise DegenerateFitError(f"only {np.count_nonzero(keep)} nonzero coefficients in [{k_min}, {k_max}]")
    slope, _ = np.polyfit(np.log(k[keep]), np.log(np.abs(values[keep])), 1)
    return float(slope)


def rate_fit(Ms: Sequence[float], errors: Sequence[float], floor: float = None, tail: int = None) -> RateFit:
    """
    Mínimos cuadrados sobre (log M, log error), descartando errores bajo el piso.

    Args:
        tail: si se da, sólo entran los últimos `tail` puntos utilizables (la cola asintótica)

    Raises:
        DomainError: tail menor que 4
        DegenerateFitError: menos de 4 puntos utilizables
    """
    if tail is not None and tail < MIN_FIT_POINTS:
        raise DomainError(f"rate fits need a tail of at least {MIN_FIT_POINTS} points, got {tail}")
    if floor is None:
        floor = SolverSettings.load().error_floor
    Ms = np.asarray(Ms, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if Ms.shape != errors.shape:
        raise DomainError("rate fits need one error per M")
    usable = np.isfinite(errors) & (errors >= floor) & (Ms > 0)
    if tail is not None:
        usable[np.flatnonzero(usable)[:-tail]] = False
    if np.count_nonzero(usable) < MIN_FIT_POINTS:
        raise DegenerateFitError(f"only {np.count_nonzero(usable)} points above the error floor {floor:g}")
    dropped = Ms.size - np.count_nonzero(usable)
    if dropped:
        logger.debug(f"Rate fit ignores {dropped} points (floor {floor:g}, tail {tail})")

    x, y = np.log(Ms[usable]), np.log(errors[usable])
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = math.sqrt(float(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return RateFit(float(slope), float(intercept), residual, int(x.size))


def projection_errors(
    y: Callable,
    alpha: float,
    Ms: Sequence[int],
    T: float = 1.0,
    reference_degree: int = None,
) -> List[ProjectionErrorRow]:
    """
    Error de la proyección Pi_M^{-alpha,0} de y para cada M.

    Se calcula una sola proyección de grado alto (composite) y cada error sale de su cola.
    """
    _check_order(alpha)
    cfg = SolverSettings.load()
    degree = cfg.max_degree if reference_degree is None else reference_degree
    if max(Ms) >= degree:
        raise DomainError(f"M values must stay below the reference degree {degree}")
    weight = JacobiWeight(-alpha, 0.0, T)
    reference = project(y, weight, degree, composite=True)
    weights = xi(weight, np.arange(degree + 1))

    rows = []
    for M in Ms:
        tail = np.array(reference.coeffs)
        tail[:M + 1] = 0.0
        tail_expansion = Expansion(weight, tail)
        seminorm_sq = frac_pairing(tail_expansion, tail_expansion, alpha) / math.cos(0.5 * alpha * math.pi)
        rows.append(ProjectionErrorRow(
            M=int(M),
            weighted_l2=math.sqrt(float(np.sum(weights * tail ** 2))),
            seminorm=math.sqrt(max(seminorm_sq, 0.0)),
        ))
    return rows
