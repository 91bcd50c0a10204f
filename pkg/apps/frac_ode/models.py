from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from apps.core.exceptions import DomainError
from apps.core.models import SolverSettings
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import gauss_rule, xi
from apps.special_fn.models import ScalarOdeData


def _legendre_moments(T: float, M: int, power: float, cofactor: Callable, nodes_count: int) -> np.ndarray:
    """<t^power * cofactor, L_i>_{(0,T)} con la regla de Gauss-Jacobi de peso t^power."""
    rule = gauss_rule(JacobiWeight(0.0, power, T), nodes_count)
    values = np.asarray(cofactor(rule.nodes), dtype=float) * np.ones_like(rule.nodes)
    V = JacobiWeight.legendre(T).vandermonde(M, rule.nodes)
    return (rule.weights * values) @ V


class Forcing:
    """
    Término fuente g(t) de la EDO escalar.

    Cada subclase sabe integrar g contra la base de Legendre de (0, T):
    legendre_moments(M, T)[i] = <g, L_i>_{(0,T)}.
    """
    tag = 'custom'

    def __call__(self, t):
        raise NotImplementedError

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroForcing(Forcing):
    tag = 'zero'

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        return np.zeros(M + 1)


@dataclass(frozen=True)
class ConstantForcing(Forcing):
    value: float = 1.0
    tag = 'constant'

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        moments = np.zeros(M + 1)
        moments[0] = self.value * T
        return moments


@dataclass(frozen=True)
class PowerForcing(Forcing):
    """g(t) = sum_j c_j t^{sigma_j}; cada término se integra exactamente con peso t^{sigma_j}."""
    terms: Tuple[Tuple[float, float], ...] = ()
    tag = 'power'

    def __post_init__(self):
        terms = tuple((float(c), float(sigma)) for c, sigma in self.terms)
        for _, sigma in terms:
            if not sigma > -1:
                raise DomainError(f"power forcing exponents must exceed -1, got {sigma}")
        object.__setattr__(self, 'terms', terms)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum((c * t ** sigma for c, sigma in self.terms), np.zeros_like(t))

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        moments = np.zeros(M + 1)
        for c, sigma in self.terms:
            if c:
                moments += c * _legendre_moments(T, M, sigma, np.ones_like, M + 1)
        return moments


@dataclass(frozen=True)
class CallableForcing(Forcing):
    """
    g(t) = t^left_power * func(t).

    Con left_power conocido la regla (0, left_power) absorbe la singularidad en t = 0.
    """
    func: Callable
    left_power: float = 0.0
    tag = 'custom'

    def __post_init__(self):
        if not self.left_power > -1:
            raise DomainError(f"left_power must exceed -1, got {self.left_power}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** self.left_power * np.asarray(self.func(t), dtype=float)

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        cfg = SolverSettings.load()
        return _legendre_moments(T, M, self.left_power, self.func, M + cfg.quad_extra_nodes)


@dataclass(frozen=True, eq=False)
class ModalForcing(Forcing):
    """Momentos de Legendre ya calculados (coeficiente modal de f(., t) proyectado en espacio)."""
    moments: np.ndarray
    T: float = 1.0
    tag = 'from-mode'

    def __post_init__(self):
        moments = np.array(self.moments, dtype=float)
        if moments.ndim != 1 or not np.all(np.isfinite(moments)):
            raise DomainError("modal forcing moments must be a finite vector")
        moments.setflags(write=False)
        object.__setattr__(self, 'moments', moments)

    def __call__(self, t):
        # reconstrucción por la proyección de Legendre de grado len(moments) - 1
        weight = JacobiWeight.legendre(self.T)
        degree = self.moments.size - 1
        coeffs = self.moments / xi(weight, np.arange(degree + 1))
        return Expansion(weight, coeffs)(t)

    def legendre_moments(self, M: int, T: float) -> np.ndarray:
        if T != self.T:
            raise DomainError(f"modal forcing was built for T={self.T}, not T={T}")
        if M + 1 > self.moments.size:
            raise DomainError(f"modal forcing holds {self.moments.size} moments, {M + 1} requested")
        return np.array(self.moments[:M + 1])


@dataclass(frozen=True)
class FracOdeProblem:
    """D^alpha_{0+}(y - y0) + lambda*y = g en (0, T)."""
    data: ScalarOdeData
    forcing: Forcing = field(default_factory=ZeroForcing)

    def __post_init__(self):
        if not self.data.alpha < 1.0:
            raise DomainError(f"the spectral solver needs 0 < alpha < 1, got {self.data.alpha}")


@dataclass(frozen=True, eq=False)
class ScalarSpectralSolution:
    """y(t) = offset + poly(t), con poly en la base de Legendre de (0, T)."""
    offset: float
    poly: Expansion

    def __post_init__(self):
        if not self.poly.weight.is_legendre:
            raise DomainError("the polynomial part must be a Legendre expansion")

    @property
    def degree(self) -> int:
        return self.poly.degree

    @property
    def T(self) -> float:
        return self.poly.weight.T

    def __call__(self, t):
        return self.offset + self.poly(t)
