"""
Funciones especiales: Gamma y Mittag-Leffler sobre el eje real negativo,
y las soluciones cerradas de la EDO fraccionaria escalar construidas con ellas.

DECISIONES NUMÉRICAS:
- Serie de potencias para t < ML_T_SWITCH (converge rápido para |z| <= 1)
- Representación integral para t >= ML_T_SWITCH y beta < 1
- beta >= 1: se baja beta con E_{a,b}(z) = 1/Gamma(b) + z*E_{a,b+a}(z) hasta beta' < 1
- La integral se evalúa en la variable s = r^{1/alpha}: paneles geométricos con
  Gauss-Legendre y un primer panel Gauss-Jacobi que absorbe el factor s^{alpha-beta}
"""

import logging
import math
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from apps.core.exceptions import AccuracyError, DomainError
from apps.core.models import SolverSettings
from .models import MLArgs, ScalarOdeData

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# e^{-S_MAX} < 1e-21
S_MAX = 50.0
PANEL_RATIO = 0.25
BASE_NODES = 16
MAX_NODES = 1024
BLOCK_SIZE = 512


# ============================================================================
# GAMMA
# ============================================================================

def gamma_fn(z: float) -> float:
    """
    Gamma(z) con precisión de máquina (scipy.special.gamma).

    Raises:
        DomainError: en los polos z = 0, -1, -2, ... o si el valor desborda el double
    """
    z = float(z)
    if z <= 0 and z == math.floor(z):
        raise DomainError(f"Gamma has a pole at z = {z:g}")
    value = float(special.gamma(z))
    if not math.isfinite(value):
        raise DomainError(f"Gamma({z:g}) overflows double precision; use log_gamma_fn")
    return value


def log_gamma_fn(z: float) -> float:
    """log Gamma(z) para z > 0; sirve donde gamma_fn desborda."""
    z = float(z)
    if z <= 0:
        raise DomainError(f"log_gamma_fn requires z > 0, got {z:g}")
    return float(special.gammaln(z))


# ============================================================================
# MITTAG-LEFFLER: piezas vectorizadas
# ============================================================================

def _series_values(alpha: float, beta: float, t: np.ndarray, tol: float, max_terms: int) -> np.ndarray:
    z = -t
    total = np.zeros_like(z)
    power = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)

    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(max_terms):
            arg = alpha * k + beta
            term = power * special.rgamma(arg)
            total = np.where(done, total, total + term)
            # 1/Gamma se anula en los polos: solo se corta una vez pasado el mínimo de Gamma
            if arg > 2.0:
                done |= np.abs(term) < tol * (1.0 + np.abs(total))
                if done.all():
                    logger.debug(f"ML series (alpha={alpha}, beta={beta}) converged after {k + 1} terms")
                    return total
            power = power * z
            if not np.all(np.isfinite(power[~done])):
                break

    raise AccuracyError(
        f"Mittag-Leffler series did not converge within {max_terms} terms "
        f"(alpha={alpha}, beta={beta}, max t={float(np.max(t)):g})"
    )


def _lower_cutoff(alpha: float, t_min: float) -> float:
    # Por debajo de s_min, r = s^alpha << t y el integrando es casi constante en r
    return max((1e-7 * min(1.0, t_min)) ** (1.0 / alpha), 1e-280)


@lru_cache(maxsize=128)
def _panel_rule(alpha: float, beta: float, s_min: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Regla compuesta para int_0^S_MAX s^{alpha-beta} h(s) ds."""
    power = alpha - beta
    edges = [S_MAX]
    while edges[-1] > s_min:
        edges.append(edges[-1] * PANEL_RATIO)
    edges = np.array(edges[::-1])

    x, w = leggauss(n)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel() * nodes ** power

    # primer panel [0, edges[0]] con peso s^{alpha-beta}
    xj, wj = special.roots_jacobi(n, 0.0, power)
    first = edges[0]
    nodes0 = 0.5 * first * (xj + 1.0)
    weights0 = wj * (0.5 * first) ** (power + 1.0)

    all_nodes = np.concatenate([nodes0, nodes])
    all_weights = np.concatenate([weights0, weights])
    all_nodes.setflags(write=False)
    all_weights.setflags(write=False)
    return all_nodes, all_weights


def _integral_values(alpha: float, beta: float, t: np.ndarray, rtol: float) -> np.ndarray:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"integral representation requires 0 < alpha < 1, got {alpha}")
    if beta >= 1.0:
        raise DomainError(f"integral representation requires beta < 1, got {beta}")
    if np.any(t <= 0):
        raise DomainError("integral representation requires t > 0")

    s_min = _lower_cutoff(alpha, float(np.min(t)))
    sin_b = math.sin(beta * math.pi)
    sin_ab = math.sin((alpha - beta) * math.pi)
    cos_a = math.cos(alpha * math.pi)

    flat = t.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, BLOCK_SIZE):
        block = flat[start:start + BLOCK_SIZE][:, None]
        previous = None
        n = BASE_NODES
        while True:
            s, w = _panel_rule(alpha, beta, s_min, n)
            r = s ** alpha
            phi = (r * sin_b - block * sin_ab) / (r * r + block * block + 2.0 * block * r * cos_a)
            values = phi * np.exp(-s)
            estimate = values @ w / math.pi
            magnitude = np.abs(values) @ np.abs(w) / math.pi
            if previous is not None and np.all(np.abs(estimate - previous) <= rtol * magnitude):
                break
            if n >= MAX_NODES:
                raise AccuracyError(
                    f"Mittag-Leffler integral did not converge with {n} nodes per panel "
                    f"(alpha={alpha}, beta={beta})"
                )
            previous = estimate
            n *= 2
        logger.debug(f"ML integral (alpha={alpha}, beta={beta}) used {n} nodes per panel")
        out[start:start + block.shape[0]] = estimate
    return out.reshape(t.shape)


def _exponential_family(beta: float, t: np.ndarray) -> np.ndarray:
    # alpha = 1: E_{1,b}(-t) = (-t)^{1-b} e^{-t} para b entero <= 1, y hacia arriba por la identidad
    if beta != math.floor(beta):
        raise DomainError(f"alpha = 1 is only supported for integer beta, got {beta}")
    if beta <= 1:
        return (-t) ** int(1 - beta) * np.exp(-t)
    lower = _exponential_family(beta - 1.0, t)
    return (lower - special.rgamma(beta - 1.0)) / (-t)


def _large_argument(alpha: float, beta: float, t: np.ndarray, cfg: SolverSettings) -> np.ndarray:
    if alpha == 1.0:
        return _exponential_family(beta, t)
    if beta < 1.0:
        return _integral_values(alpha, beta, t, cfg.ml_integral_rtol)
    lower = _large_argument(alpha, beta - alpha, t, cfg)
    return (lower - special.rgamma(beta - alpha)) / (-t)


def ml_values(alpha: float, beta: float, t: ArrayLike) -> np.ndarray:
    """
    E_{alpha,beta}(-t) evaluada elemento a elemento.

    Args:
        alpha: orden en (0, 1]
        beta: segundo parámetro real
        t: escalar o arreglo de valores t >= 0 (se evalúa en z = -t)

    Returns:
        np.ndarray con la forma de t
    """
    cfg = SolverSettings.load()
    t = np.asarray(t, dtype=float)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("t must be finite and nonnegative")

    out = np.empty_like(t)
    low = t < cfg.t_switch
    if np.any(low):
        out[low] = _series_values(alpha, beta, t[low], cfg.ml_series_tol, cfg.ml_max_terms)
    if np.any(~low):
        out[~low] = _large_argument(alpha, beta, t[~low], cfg)
    return out


# ============================================================================
# MITTAG-LEFFLER: operaciones escalares
# ============================================================================

def ml_series(args: MLArgs, tol: float = None) -> float:
    """
    Suma parcial de sum_k (-t)^k / Gamma(alpha*k + beta).

    Se corta cuando |término| < tol * (1 + |suma|). Pensada para t <= ML_T_SWITCH.

    Raises:
        AccuracyError: si no converge dentro de ML_MAX_TERMS términos
    """
    cfg = SolverSettings.load()
    tol = cfg.ml_series_tol if tol is None else tol
    if not tol > 0:
        raise DomainError(f"series tolerance must be positive, got {tol}")
    value = _series_values(args.alpha, args.beta, np.array([args.t]), tol, cfg.ml_max_terms)
    return float(value[0])


def ml_integral(args: MLArgs) -> float:
    """
    E_{alpha,beta}(-t) por la representación integral (válida para beta < 1, t > 0).

    Raises:
        DomainError: beta >= 1, alpha = 1 o t = 0
        AccuracyError: si el refinamiento de paneles no converge
    """
    cfg = SolverSettings.load()
    value = _integral_values(args.alpha, args.beta, np.array([args.t]), cfg.ml_integral_rtol)
    return float(value[0])


def ml(args: MLArgs) -> float:
    """Despachador: serie debajo de ML_T_SWITCH, integral (con reducción de beta) arriba."""
    return float(ml_values(args.alpha, args.beta, np.array([args.t]))[0])


# ============================================================================
# SOLUCIONES CERRADAS DE LA EDO ESCALAR
# ============================================================================

def _time_points(data: ScalarOdeData, t: ArrayLike) -> Tuple[np.ndarray, bool]:
    scalar = np.ndim(t) == 0
    points = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(points < 0) or np.any(points > data.T * (1 + 1e-14)):
        raise DomainError(f"t must lie in [0, {data.T}]")
    return points, scalar


def _unwrap(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values[0]) if scalar else values


def exact_homogeneous(data: ScalarOdeData, t: ArrayLike) -> ArrayLike:
    """y(t) = y0 * E_{alpha,1}(-lambda t^alpha): solución con g = 0."""
    points, scalar = _time_points(data, t)
    values = data.y0 * ml_values(data.alpha, 1.0, data.lam * points ** data.alpha)
    return _unwrap(values, scalar)


def exact_constant_forcing(data: ScalarOdeData, t: ArrayLike) -> ArrayLike:
    """y(t) = t^alpha * E_{alpha,alpha+1}(-lambda t^alpha): solución con y0 = 0 y g = 1."""
    if data.y0 != 0:
        raise DomainError("exact_constant_forcing expects y0 = 0")
    points, scalar = _time_points(data, t)
    arg = data.lam * points ** data.alpha
    values = points ** data.alpha * ml_values(data.alpha, data.alpha + 1.0, arg)
    return _unwrap(values, scalar)


def exact_homogeneous_deriv(k: int, data: ScalarOdeData, t: ArrayLike) -> ArrayLike:
    """
    Derivada k-ésima de la solución homogénea:
    y^(k)(t) = -lambda * y0 * t^{alpha-k} * E_{alpha,alpha+1-k}(-lambda t^alpha).

    Raises:
        DomainError: k fuera de [1, K_MAX] o t = 0 (singular)
    """
    cfg = SolverSettings.load()
    if not (1 <= k <= cfg.k_max):
        raise DomainError(f"derivative order must lie in [1, {cfg.k_max}], got {k}")
    points, scalar = _time_points(data, t)
    if np.any(points <= 0):
        raise DomainError("derivatives of the homogeneous solution are singular at t = 0")
    arg = data.lam * points ** data.alpha
    values = -data.lam * data.y0 * points ** (data.alpha - k) * ml_values(data.alpha, data.alpha + 1.0 - k, arg)
    return _unwrap(values, scalar)
