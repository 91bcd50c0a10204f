"""
Galerkin espectral en tiempo para D^alpha_{0+}(y - y0) + lambda*y = g en (0, T).

La incógnita es y~ = y - y0 en P_M(0, T) (base de Legendre) y la matriz es

    A = C2^T diag(d) C1 + lambda * diag(T / (2i + 1))

con C1, C2 los cambios de base Legendre -> S^{-alpha,0} y Legendre -> S^{0,-alpha}.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from apps.core.exceptions import DomainError, NumericError
from apps.core.models import SolverSettings
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import basis_change_matrix, composite_rule, pairing_diagonal
from .models import FracOdeProblem, ScalarSpectralSolution

logger = logging.getLogger(__name__)


def _check_order(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


@lru_cache(maxsize=64)
def fractional_block(alpha: float, M: int, T: float = 1.0) -> np.ndarray:
    """F[i, j] = <D^{alpha/2}_{0+} L_j, D^{alpha/2}_{T-} L_i>; sólo lectura."""
    _check_order(alpha)
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    legendre = JacobiWeight.legendre(T)
    C1 = basis_change_matrix(legendre, JacobiWeight(-alpha, 0.0, T), M)
    C2 = basis_change_matrix(legendre, JacobiWeight(0.0, -alpha, T), M)
    d = pairing_diagonal(alpha, M, T)
    block = C2.T @ (d[:, None] * C1)
    block.setflags(write=False)
    return block


def mass_diagonal(M: int, T: float = 1.0) -> np.ndarray:
    return T / (2.0 * np.arange(M + 1) + 1.0)


@lru_cache(maxsize=256)
def assemble(alpha: float, lam: float, M: int, T: float = 1.0) -> np.ndarray:
    """
    Matriz de Galerkin (M+1)x(M+1):
    A[i][j] = frac_pairing(L_j, L_i, alpha) + lambda * <L_j, L_i>_{(0,T)}.
    """
    A = fractional_block(alpha, M, T) + np.diag(lam * mass_diagonal(M, T))
    A.setflags(write=False)
    return A


def _right_hand_side(problem: FracOdeProblem, M: int) -> np.ndarray:
    data = problem.data
    b = np.array(problem.forcing.legendre_moments(M, data.T), dtype=float)
    b[0] -= data.lam * data.y0 * data.T
    return b


def _dense_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = linalg.solve(A, b)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"spectral Galerkin system of size {A.shape[0]} is singular") from exc
    if not np.all(np.isfinite(x)):
        raise NumericError("spectral Galerkin solve produced non-finite coefficients")
    return x


def solve(problem: FracOdeProblem, M: int) -> ScalarSpectralSolution:
    """
    Resuelve A y^ = b con b_i = <g - lambda*y0, L_i>_{(0,T)}.

    Returns:
        ScalarSpectralSolution con offset y0 y la parte polinomial y~

    Raises:
        NumericError: si el sistema resulta singular
    """
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    data = problem.data
    A = assemble(data.alpha, data.lam, M, data.T)
    x = _dense_solve(A, _right_hand_side(problem, M))
    return ScalarSpectralSolution(data.y0, Expansion(JacobiWeight.legendre(data.T), x))


def solve_modes(
    alpha: float,
    lams: Sequence[float],
    rhs: np.ndarray,
    M: int,
    T: float = 1.0,
    max_workers: int = None,
) -> np.ndarray:
    """
    Resuelve (F + lambda_n * Mass) x_n = rhs_n para cada modo n.

    Args:
        lams: autovalores lambda_n (uno por fila de rhs)
        rhs: lados derechos ya armados, forma (n_modos, M + 1)

    Returns:
        np.ndarray (n_modos, M + 1) con los coeficientes de Legendre de cada modo
    """
    lams = np.asarray(lams, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (lams.size, M + 1):
        raise DomainError(f"rhs must have shape ({lams.size}, {M + 1}), got {rhs.shape}")
    if max_workers is None:
        max_workers = SolverSettings.load().max_workers

    F = fractional_block(alpha, M, T)
    mass = mass_diagonal(M, T)

    def one_mode(n: int) -> np.ndarray:
        return _dense_solve(F + np.diag(lams[n] * mass), rhs[n])

    # cada modo escribe sólo su fila: el resultado no depende del orden de ejecución
    out = np.empty_like(rhs)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        for n, x in enumerate(pool.map(one_mode, range(lams.size))):
            out[n] = x
    logger.debug(f"Solved {lams.size} modal systems of size {M + 1} with {max_workers} workers")
    return out


def residual_check(problem: FracOdeProblem, sol: ScalarSpectralSolution) -> float:
    """max_i |a(y, L_i) - <g - lambda*y0, L_i>| / escala, sobre los tests L_0..L_M."""
    data = problem.data
    M = sol.degree
    A = assemble(data.alpha, data.lam, M, data.T)
    b = _right_hand_side(problem, M)
    x = sol.poly.coeffs
    residual = np.max(np.abs(A @ x - b))
    scale = max(np.max(np.abs(b)), np.linalg.norm(A, np.inf) * np.max(np.abs(x)))
    if scale == 0:
        return float(residual)
    return float(residual / scale)


def coercivity_margin(alpha: float, M: int, T: float = 1.0) -> float:
    """Menor autovalor de la parte simétrica del bloque fraccionario."""
    F = fractional_block(alpha, M, T)
    return float(linalg.eigvalsh(0.5 * (F + F.T))[0])


def l2_distance(sol: ScalarSpectralSolution, reference: Callable, levels: int = 12) -> float:
    """
    ||y_M - y||_{L^2(0,T)} contra una referencia evaluable (típicamente Mittag-Leffler).

    La referencia suele tener un término t^alpha en el origen: se integra con
    la regla compuesta refinada hacia t = 0.
    """
    cfg = SolverSettings.load()
    rule = composite_rule(JacobiWeight.legendre(sol.T), sol.degree + cfg.quad_extra_nodes, levels)
    diff = sol(rule.nodes) - np.asarray(reference(rule.nodes), dtype=float)
    return float(np.sqrt(rule.integrate(diff ** 2)))
