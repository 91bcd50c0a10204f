"""
Polinomios de Jacobi desplazados S_k^{a,b} sobre (0, T).

Incluye constantes de ortogonalidad, reglas de Gauss-Jacobi, proyecciones
ponderadas, cambios de base y los mapas fraccionarios de Riemann-Liouville
en forma cerrada (que sólo reescalan coeficientes y cambian el peso).
"""

import logging
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import special

from apps.core.exceptions import DomainError, NumericError
from apps.core.models import SolverSettings
from .models import (
    DERIVATIVE,
    INTEGRAL,
    LEFT,
    RIGHT,
    Expansion,
    JacobiWeight,
    QuadratureRule,
    WeightedFracImage,
)

logger = logging.getLogger(__name__)

# Refinamiento geométrico hacia t = 0 para integrandos con singularidad desconocida
COMPOSITE_LEVEL_STEP = 4
COMPOSITE_MAX_LEVELS = 40
COMPOSITE_TOL = 1e-10
PLATEAU_RATIO = 0.98


# ============================================================================
# EVALUACIÓN Y CONSTANTES
# ============================================================================

def eval_shifted(weight: JacobiWeight, k: int, t):
    """
    S_k^{a,b}(t) por recurrencia de tres términos en x = 2t/T - 1.

    Args:
        weight: peso (a, b, T) de la familia
        k: grado
        t: punto o arreglo de puntos en [0, T]
    """
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    points = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(points < 0) or np.any(points > weight.T):
        raise DomainError(f"evaluation points must lie in [0, {weight.T}]")
    values = weight.vandermonde(k, points)[:, k]
    return float(values[0]) if np.ndim(t) == 0 else values


def xi(weight: JacobiWeight, k):
    """
    xi_k = ||S_k||^2 en L^2_{mu^{a,b}}:
    T^{a+b+1} Gamma(k+a+1) Gamma(k+b+1) / ((2k+a+b+1) k! Gamma(k+a+b+1)).

    Se evalúa con diferencias de log-Gamma; k = 0 usa la forma Beta,
    que cubre a + b + 1 = 0.
    """
    a, b, T = weight.a, weight.b, weight.T
    degrees = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(degrees < 0):
        raise DomainError("degrees must be nonnegative")

    logs = np.empty_like(degrees)
    zero = degrees == 0
    logs[zero] = special.gammaln(a + 1) + special.gammaln(b + 1) - special.gammaln(a + b + 2)
    rest = degrees[~zero]
    logs[~zero] = (
        special.gammaln(rest + a + 1) + special.gammaln(rest + b + 1)
        - np.log(2 * rest + a + b + 1) - special.gammaln(rest + 1) - special.gammaln(rest + a + b + 1)
    )
    values = T ** (a + b + 1) * np.exp(logs)
    return float(values[0]) if np.ndim(k) == 0 else values


@lru_cache(maxsize=256)
def gauss_rule(weight: JacobiWeight, n: int) -> QuadratureRule:
    """
    Regla de Gauss-Jacobi de n nodos para mu^{a,b} en (0, T); exacta hasta grado 2n - 1.

    Raises:
        NumericError: si el autoproblema de Golub-Welsch falla
    """
    if n < 1:
        raise DomainError(f"a Gauss rule needs at least one node, got {n}")
    try:
        x, w = special.roots_jacobi(n, weight.a, weight.b)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"Gauss-Jacobi rule failed for {weight}, n={n}") from exc
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
        raise NumericError(f"Gauss-Jacobi rule returned non-finite values for {weight}, n={n}")

    order = np.argsort(x)
    half = 0.5 * weight.T
    nodes = half * (x[order] + 1.0)
    weights = w[order] * half ** (weight.a + weight.b + 1.0)
    return QuadratureRule(weight, nodes, weights)


def _jacobi_panel(left: float, right: float, n: int, power: float, singular_end: str):
    """Nodos/pesos para int_left^right |t - end|^power h(t) dt."""
    if singular_end == LEFT:
        x, w = special.roots_jacobi(n, 0.0, power)
    else:
        x, w = special.roots_jacobi(n, power, 0.0)
    half = 0.5 * (right - left)
    return left + half * (x + 1.0), w * half ** (power + 1.0)


def composite_rule(weight: JacobiWeight, n: int, levels: int) -> QuadratureRule:
    """
    Regla compuesta para mu^{a,b}: panel Gauss-Jacobi en [0, T 4^{-levels}/2],
    paneles Gauss-Legendre geométricos hasta T/2 y Gauss-Jacobi en [T/2, T].
    """
    T = weight.T
    edges = 0.5 * T * 0.25 ** np.arange(levels, -1, -1)

    nodes, weights = [], []
    x0, w0 = _jacobi_panel(0.0, edges[0], n, weight.b, LEFT)
    nodes.append(x0)
    weights.append(w0 * (T - x0) ** weight.a)

    x, w = np.polynomial.legendre.leggauss(n)
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        xs = left + half * (x + 1.0)
        nodes.append(xs)
        weights.append(half * w * weight(xs))

    x1, w1 = _jacobi_panel(0.5 * T, T, n, weight.a, RIGHT)
    nodes.append(x1)
    weights.append(w1 * x1 ** weight.b)
    return QuadratureRule(weight, np.concatenate(nodes), np.concatenate(weights))


# ============================================================================
# PROYECCIONES
# ============================================================================

def _sample(f: Callable, nodes: np.ndarray) -> np.ndarray:
    values = np.asarray(f(nodes), dtype=float)
    if values.shape != nodes.shape:
        values = np.array([float(f(x)) for x in nodes])
    if not np.all(np.isfinite(values)):
        raise DomainError("function values at the quadrature nodes are not finite")
    return values


def _coefficients(f: Callable, weight: JacobiWeight, M: int, rule: QuadratureRule) -> np.ndarray:
    # un factor t^sigma conocido ya está en los pesos de la regla
    values = _sample(f, rule.nodes)
    V = weight.vandermonde(M, rule.nodes)
    return (rule.weights * values) @ V / xi(weight, np.arange(M + 1))


def _warn_on_tail_plateau(coeffs: np.ndarray, weight: JacobiWeight) -> None:
    M = coeffs.size - 1
    if M < 16:
        return
    scaled = np.abs(coeffs) * np.sqrt(xi(weight, np.arange(M + 1)))
    peak = scaled.max()
    if peak == 0:
        return
    q = max(4, (M + 1) // 8)
    tail, before = scaled[-q:], scaled[-2 * q:-q]
    if tail.max() > 1e-13 * peak and tail.mean() >= PLATEAU_RATIO * before.mean():
        logger.warning(
            f"Projection onto degree {M} in weight ({weight.a}, {weight.b}) shows a coefficient "
            f"plateau at {tail.mean() / peak:.2e} of the peak; quadrature may be under-resolved"
        )


def project(
    f: Callable,
    weight: JacobiWeight,
    M: int,
    rule: QuadratureRule = None,
    *,
    left_power: float = 0.0,
    composite: bool = False,
) -> Expansion:
    """
    Proyección L^2_{mu^{a,b}}-ortogonal sobre P_M: v_k = <f, S_k>_{mu} / xi_k.

    Args:
        f: función vectorizada en (0, T)
        weight: peso de la base destino
        M: grado máximo
        rule: regla explícita; su peso debe ser (a, b + left_power)
        left_power: si f = t^sigma g(t) con sigma conocido, se pasa g y sigma;
            la regla (a, b + sigma) absorbe la singularidad
        composite: refinar geométricamente hacia t = 0 (singularidad desconocida)
            hasta que los coeficientes se estabilicen a 1e-10

    Returns:
        Expansion en la base de weight
    """
    cfg = SolverSettings.load()
    if not (0 <= M <= cfg.max_degree):
        raise DomainError(f"projection degree must lie in [0, {cfg.max_degree}], got {M}")
    quad_weight = JacobiWeight(weight.a, weight.b + left_power, weight.T)

    if composite:
        coeffs = _composite_coefficients(f, weight, quad_weight, M, cfg)
    else:
        if rule is None:
            rule = gauss_rule(quad_weight, M + cfg.quad_extra_nodes)
        elif not _same_weight(rule.weight, quad_weight):
            raise DomainError(f"rule weight {rule.weight} does not match {quad_weight}")
        coeffs = _coefficients(f, weight, M, rule)

    _warn_on_tail_plateau(coeffs, weight)
    return Expansion(weight, coeffs)


def _composite_coefficients(f, weight, quad_weight, M, cfg) -> np.ndarray:
    n = M + cfg.quad_extra_nodes
    previous = None
    for levels in range(COMPOSITE_LEVEL_STEP, COMPOSITE_MAX_LEVELS + 1, COMPOSITE_LEVEL_STEP):
        rule = composite_rule(quad_weight, n, levels)
        coeffs = _coefficients(f, weight, M, rule)
        if previous is not None:
            change = np.max(np.abs(coeffs - previous))
            if change <= COMPOSITE_TOL * max(1.0, np.max(np.abs(coeffs))):
                logger.debug(f"Composite projection stabilized with {levels} levels")
                return coeffs
        previous = coeffs
    logger.warning(
        f"Composite projection did not stabilize within {COMPOSITE_MAX_LEVELS} levels "
        f"(last change {change:.2e})"
    )
    return coeffs


def _same_weight(first: JacobiWeight, second: JacobiWeight) -> bool:
    return (
        abs(first.a - second.a) <= 1e-14
        and abs(first.b - second.b) <= 1e-14
        and first.T == second.T
    )


# ============================================================================
# CAMBIOS DE BASE
# ============================================================================

@lru_cache(maxsize=256)
def basis_change_matrix(source: JacobiWeight, target: JacobiWeight, degree: int) -> np.ndarray:
    """
    C tal que coeffs_target = C @ coeffs_source para polinomios de grado <= degree.

    C[j, k] = <S_k^{source}, S_j^{target}>_{mu^{target}} / xi_j^{target}; es triangular superior (S_k sólo se expande en S_j con j <= k).
    """
    cfg = SolverSettings.load()
    if source.T != target.T:
        raise DomainError(f"bases live on different intervals (T={source.T} vs T={target.T})")
    if not (0 <= degree <= cfg.max_degree):
        raise DomainError(f"basis changes are capped at degree {cfg.max_degree}, got {degree}")

    rule = gauss_rule(target, degree + 1)
    Vs = source.vandermonde(degree, rule.nodes)
    Vt = target.vandermonde(degree, rule.nodes)
    C = (Vt * rule.weights[:, None]).T @ Vs / xi(target, np.arange(degree + 1))[:, None]
    C = np.triu(C)
    C.setflags(write=False)
    return C


def change_basis(e: Expansion, target: JacobiWeight) -> Expansion:
    """Reexpansión exacta de un polinomio en la base de target (mismo grado)."""
    if _same_weight(e.weight, target):
        return e
    C = basis_change_matrix(e.weight, target, e.degree)
    return Expansion(target, C @ e.coeffs)


def reflect(e: Expansion) -> Expansion:
    """t -> T - t: S_k^{a,b}(T - t) = (-1)^k S_k^{b,a}(t)."""
    signs = (-1.0) ** np.arange(e.degree + 1)
    return Expansion(JacobiWeight(e.weight.b, e.weight.a, e.weight.T), signs * e.coeffs)


# ============================================================================
# MAPAS FRACCIONARIOS
# ============================================================================

def _check_theta(theta: float) -> None:
    if not (0.0 < theta < 1.0):
        raise DomainError(f"theta must lie in (0, 1), got {theta}")


def _gamma_ratio(degree: int, shift: float) -> np.ndarray:
    """k! / Gamma(k + 1 + shift) para k = 0..degree."""
    k = np.arange(degree + 1, dtype=float)
    return np.exp(special.gammaln(k + 1) - special.gammaln(k + 1 + shift))


def _invert_image(image: WeightedFracImage, theta: float, expected_kind: str) -> Expansion:
    if image.kind != expected_kind:
        raise DomainError(f"expected an image of kind '{expected_kind}', got '{image.kind}'")
    if abs(image.theta - theta) > 1e-14:
        raise DomainError(f"image order {image.theta} does not match theta={theta}")
    degree = image.coeffs.size - 1
    w = image.weight
    # D^theta deshace D^{-theta} y viceversa
    if expected_kind == INTEGRAL:
        coeffs = image.coeffs / _gamma_ratio(degree, theta)
        source = JacobiWeight(w.a + theta, 0.0, w.T) if image.side == LEFT else JacobiWeight(0.0, w.b + theta, w.T)
    else:
        coeffs = image.coeffs / _gamma_ratio(degree, -theta)
        source = JacobiWeight(w.a - theta, 0.0, w.T) if image.side == LEFT else JacobiWeight(0.0, w.b - theta, w.T)
    return Expansion(source, coeffs)


def frac_deriv_map(
    e: Union[Expansion, WeightedFracImage], theta: float, side: str = LEFT
) -> Union[WeightedFracImage, Expansion]:
    """
    Derivada de Riemann-Liouville de orden theta en forma cerrada.

    Izquierda: D^theta_{0+} S_k^{a,0} = (k!/Gamma(k+1-theta)) t^{-theta} S_k^{a+theta,-theta}.
    Derecha:   D^theta_{T-} S_k^{0,b} = (k!/Gamma(k+1-theta)) (T-t)^{-theta} S_k^{-theta,b+theta}.

    Aplicada a la imagen de frac_integral_map con el mismo theta devuelve la expansión original.

    Raises:
        DomainError: theta fuera de (0, 1) o peso incompatible con el lado
    """
    _check_theta(theta)
    if isinstance(e, WeightedFracImage):
        return _invert_image(e, theta, INTEGRAL)

    w = e.weight
    factor = _gamma_ratio(e.degree, -theta)
    if side == LEFT:
        if w.b != 0:
            raise DomainError(f"left-sided map needs weight (a, 0), got ({w.a}, {w.b})")
        image_weight = JacobiWeight(w.a + theta, -theta, w.T)
    elif side == RIGHT:
        if w.a != 0:
            raise DomainError(f"right-sided map needs weight (0, b), got ({w.a}, {w.b})")
        image_weight = JacobiWeight(-theta, w.b + theta, w.T)
    else:
        raise DomainError(f"side must be '{LEFT}' or '{RIGHT}', got {side!r}")
    return WeightedFracImage(theta, side, image_weight, e.coeffs * factor, DERIVATIVE)


def frac_integral_map(
    e: Union[Expansion, WeightedFracImage], theta: float, side: str = LEFT
) -> Union[WeightedFracImage, Expansion]:
    """
    Integral de Riemann-Liouville de orden theta en forma cerrada.

    Izquierda: D^{-theta}_{0+} S_k^{a,0} = (k!/Gamma(k+1+theta)) t^theta S_k^{a-theta,theta}.
    Derecha:   D^{-theta}_{T-} S_k^{0,b} = (k!/Gamma(k+1+theta)) (T-t)^theta S_k^{theta,b-theta}.
    """
    _check_theta(theta)
    if isinstance(e, WeightedFracImage):
        return _invert_image(e, theta, DERIVATIVE)

    w = e.weight
    factor = _gamma_ratio(e.degree, theta)
    if side == LEFT:
        if w.b != 0:
            raise DomainError(f"left-sided map needs weight (a, 0), got ({w.a}, {w.b})")
        if not (w.a - theta > -1):
            raise DomainError(f"image weight a - theta = {w.a - theta} must exceed -1")
        image_weight = JacobiWeight(w.a - theta, theta, w.T)
    elif side == RIGHT:
        if w.a != 0:
            raise DomainError(f"right-sided map needs weight (0, b), got ({w.a}, {w.b})")
        if not (w.b - theta > -1):
            raise DomainError(f"image weight b - theta = {w.b - theta} must exceed -1")
        image_weight = JacobiWeight(theta, w.b - theta, w.T)
    else:
        raise DomainError(f"side must be '{LEFT}' or '{RIGHT}', got {side!r}")
    return WeightedFracImage(theta, side, image_weight, e.coeffs * factor, INTEGRAL)


# ============================================================================
# PAR FRACCIONARIO DIAGONAL
# ============================================================================

def pairing_diagonal(alpha: float, degree: int, T: float = 1.0) -> np.ndarray:
    """d_k = T^{1-alpha} k! / ((2k+1-alpha) Gamma(k+1-alpha)), k = 0..degree."""
    k = np.arange(degree + 1, dtype=float)
    return T ** (1.0 - alpha) * _gamma_ratio(degree, -alpha) / (2 * k + 1 - alpha)


def frac_pairing(p: Expansion, q: Expansion, alpha: float) -> float:
    """
    <D^{alpha/2}_{0+} p, D^{alpha/2}_{T-} q>_{(0,T)} para polinomios p, q.

    p se reexpande en S^{-alpha,0} y q en S^{0,-alpha}; ambas imágenes quedan en
    S^{-alpha/2,-alpha/2}, que es ortogonal, y el par se reduce a sum_k d_k p_k q_k.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if p.weight.T != q.weight.T:
        raise DomainError("pairing needs both polynomials on the same interval")
    T = p.weight.T
    degree = max(p.degree, q.degree)
    left = change_basis(p.padded(degree), JacobiWeight(-alpha, 0.0, T))
    right = change_basis(q.padded(degree), JacobiWeight(0.0, -alpha, T))
    return float(np.sum(pairing_diagonal(alpha, degree, T) * left.coeffs * right.coeffs))
