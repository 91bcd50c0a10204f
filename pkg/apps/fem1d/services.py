"""
Elementos finitos P1 en (0, 1) con condiciones de Dirichlet homogéneas.

Todas las matrices y vectores nodales viven en los N - 1 nodos interiores.
"""

import logging
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg, sparse, special
from scipy.sparse import linalg as sparse_linalg

from apps.core.exceptions import DomainError, NumericError
from .models import Mesh1D, ModalBasis, SpatialFunction

logger = logging.getLogger(__name__)

GAUSS_POINTS = 8
ENDPOINT_POINTS = 12
REFINE_TOL = 1e-11
MAX_REFINE_LEVELS = 60


def assemble_matrices(mesh: Mesh1D) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """
    Matrices de masa y rigidez P1 tridiagonales sobre los nodos interiores.

    Returns:
        (mass, stiffness) como scipy.sparse.csr_matrix de tamaño (N-1)x(N-1)
    """
    h = mesh.sizes
    left, right = h[:-1], h[1:]
    off_mass = h[1:-1] / 6.0
    off_stiff = -1.0 / h[1:-1]
    mass = sparse.diags([off_mass, (left + right) / 3.0, off_mass], [-1, 0, 1], format='csr')
    stiffness = sparse.diags([off_stiff, 1.0 / left + 1.0 / right, off_stiff], [-1, 0, 1], format='csr')
    return mass, stiffness


@lru_cache(maxsize=8)
def _eigenpairs(key: bytes) -> Tuple[np.ndarray, np.ndarray]:
    mesh = Mesh1D(np.frombuffer(key, dtype=float))
    mass, stiffness = assemble_matrices(mesh)
    try:
        values, vectors = linalg.eigh(stiffness.toarray(), mass.toarray())
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"generalized eigenproblem failed for {mesh.n_dofs} dofs") from exc
    signs = np.where(vectors[0] < 0, -1.0, 1.0)
    logger.debug(f"Computed {values.size} discrete eigenpairs, lambda_1 = {values[0]:.12g}")
    return values, vectors * signs


def eig(mesh: Mesh1D) -> ModalBasis:
    """
    Autodescomposición generalizada completa K phi = lambda M phi.

    Se cachea por coordenadas de malla; la base devuelta es inmutable.

    Raises:
        NumericError: si el solver simétrico generalizado falla
    """
    values, vectors = _eigenpairs(mesh.key)
    return ModalBasis(mesh, values, vectors)


def _gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _element_loads(f: Callable, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Integrales de f contra las dos funciones sombrero locales de cada elemento [a, b]."""
    y, w = _gauss_legendre(GAUSS_POINTS)
    size = (b - a)[:, None]
    X = a[:, None] + 0.5 * size * (y + 1.0)
    FW = np.asarray(f(X), dtype=float) * (0.5 * size * w)
    to_left = np.sum(FW * (b[:, None] - X), axis=1) / size[:, 0]
    to_right = np.sum(FW * (X - a[:, None]), axis=1) / size[:, 0]
    return to_left, to_right


def _endpoint_load_known_power(g: Callable, h: float, power: float) -> float:
    """int_0^h s^power g(s) (s / h) ds con Gauss-Jacobi de peso s^power."""
    y, w = special.roots_jacobi(ENDPOINT_POINTS, 0.0, power)
    s = 0.5 * h * (y + 1.0)
    values = np.asarray(g(s), dtype=float) * s / h
    return float((0.5 * h) ** (power + 1.0) * np.dot(w, values))


def _endpoint_load_refined(func: Callable, h: float) -> float:
    """
    int_0^h func(s) (s / h) ds por paneles geométricos hacia s = 0.

    Se agregan niveles hasta que el valor cambia menos de REFINE_TOL (relativo).
    """
    y, w = _gauss_legendre(GAUSS_POINTS)

    def panel(a: float, b: float) -> float:
        s = a + 0.5 * (b - a) * (y + 1.0)
        return float(0.5 * (b - a) * np.dot(w, np.asarray(func(s), dtype=float) * s / h))

    previous = None
    for levels in range(2, MAX_REFINE_LEVELS + 1, 2):
        breaks = h * 0.5 ** np.arange(levels, -1, -1)
        value = panel(0.0, breaks[0]) + sum(panel(breaks[k], breaks[k + 1]) for k in range(levels))
        if previous is not None and abs(value - previous) <= REFINE_TOL * max(1.0, abs(value)):
            return value
        previous = value
    logger.warning(f"Endpoint load did not stabilize after {MAX_REFINE_LEVELS} levels (h={h:.3g})")
    return value


def _left_endpoint_load(f: Callable, h: float, refine: bool) -> Optional[float]:
    if isinstance(f, SpatialFunction) and f.left_power != 0.0:
        def smooth_part(s):
            return (1.0 - s) ** f.right_power * np.asarray(f.cofactor(s), dtype=float)
        return _endpoint_load_known_power(smooth_part, h, f.left_power)
    if refine:
        return _endpoint_load_refined(f, h)
    return None


def _right_endpoint_load(f: Callable, h: float, refine: bool) -> Optional[float]:
    if isinstance(f, SpatialFunction) and f.right_power != 0.0:
        def smooth_part(s):
            return (1.0 - s) ** f.left_power * np.asarray(f.cofactor(1.0 - s), dtype=float)
        return _endpoint_load_known_power(smooth_part, h, f.right_power)
    if refine:
        return _endpoint_load_refined(lambda s: f(1.0 - s), h)
    return None


def load_vector(mesh: Mesh1D, f: Callable, refine: bool = False) -> np.ndarray:
    """
    b_i = int_0^1 f phi_i sobre los nodos interiores.

    Los elementos de borde usan Gauss-Jacobi si f es una SpatialFunction con
    potencia conocida en ese extremo, o refinamiento geométrico si refine=True.
    """
    nodes = mesh.nodes
    a, b = nodes[:-1], nodes[1:]
    to_left, to_right = _element_loads(f, a, b)

    first = _left_endpoint_load(f, b[0] - a[0], refine)
    if first is not None:
        to_right[0] = first
    last = _right_endpoint_load(f, b[-1] - a[-1], refine)
    if last is not None:
        to_left[-1] = last

    full = np.zeros(nodes.size)
    full[:-1] += to_left
    full[1:] += to_right
    return full[1:-1]


def l2_project(mesh: Mesh1D, f: Callable, refine: bool = False) -> np.ndarray:
    """
    Proyección L^2 de f sobre V_h: resuelve M c = b.

    Args:
        f: callable vectorizado o SpatialFunction con potencias de borde
        refine: refinamiento geométrico en los elementos de borde (singularidad desconocida)

    Returns:
        np.ndarray con los valores nodales interiores de la proyección
    """
    mass, _ = assemble_matrices(mesh)
    c = sparse_linalg.spsolve(mass.tocsc(), load_vector(mesh, f, refine))
    c = np.atleast_1d(c)
    if not np.all(np.isfinite(c)):
        raise NumericError("L2 projection produced non-finite nodal values")
    return c


def modal_coeffs(basis: ModalBasis, nodal: np.ndarray) -> np.ndarray:
    """Phi^T M nodal; acepta un vector o una matriz (n_dofs, k)."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape[0] != basis.size:
        raise DomainError(f"nodal data has {nodal.shape[0]} rows, the mesh has {basis.size} dofs")
    mass, _ = assemble_matrices(basis.mesh)
    return basis.eigenvectors.T @ (mass @ nodal)


def from_modal(basis: ModalBasis, coeffs: np.ndarray) -> np.ndarray:
    """Inversa de modal_coeffs: Phi coeffs."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != basis.size:
        raise DomainError(f"modal data has {coeffs.shape[0]} rows, the basis has {basis.size} modes")
    return basis.eigenvectors @ coeffs


def interpolate(mesh: Mesh1D, nodal: np.ndarray, x) -> np.ndarray:
    """Evalúa la función P1 con valores nodales interiores nodal (cero en el borde)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("evaluation points must lie in [0, 1]")
    values = np.concatenate(([0.0], np.asarray(nodal, dtype=float), [0.0]))
    return np.interp(x, mesh.nodes, values)


def l2_error(mesh: Mesh1D, nodal: np.ndarray, f: Callable) -> float:
    """||f - f_h||_{L^2(0,1)} con Gauss-Legendre por elemento."""
    y, w = _gauss_legendre(GAUSS_POINTS)
    a, b = mesh.nodes[:-1], mesh.nodes[1:]
    size = (b - a)[:, None]
    X = a[:, None] + 0.5 * size * (y + 1.0)
    diff = np.asarray(f(X), dtype=float) - interpolate(mesh, nodal, X)
    return float(np.sqrt(np.sum(diff ** 2 * 0.5 * size * w)))
