from dataclasses import dataclass

import numpy as np
from scipy import special

from apps.core.exceptions import DomainError
from .polynomials import jacobi_vandermonde, to_reference


def _frozen_array(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 1:
        raise DomainError(f"{name} must be a one-dimensional vector")
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} must be finite")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class JacobiWeight:
    """
    Peso mu^{a,b}(t) = (T - t)^a t^b sobre (0, T).

    a es el exponente en el extremo derecho y b en el izquierdo.
    """
    a: float
    b: float
    T: float = 1.0

    def __post_init__(self):
        if not (self.a > -1 and self.b > -1):
            raise DomainError(f"Jacobi exponents must exceed -1, got a={self.a}, b={self.b}")
        if not (self.T > 0):
            raise DomainError(f"T must be positive, got {self.T}")

    @classmethod
    def legendre(cls, T: float = 1.0) -> 'JacobiWeight':
        return cls(0.0, 0.0, T)

    @property
    def is_legendre(self) -> bool:
        return self.a == 0 and self.b == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (self.T - t) ** self.a * t ** self.b

    def moment(self, m: int) -> float:
        """int_0^T t^m mu^{a,b}(t) dt = T^{a+b+m+1} B(a+1, b+m+1)."""
        return self.T ** (self.a + self.b + m + 1) * float(special.beta(self.a + 1, self.b + m + 1))

    def vandermonde(self, degree: int, t) -> np.ndarray:
        """V[i, k] = S_k^{a,b}(t_i)."""
        return jacobi_vandermonde(self.a, self.b, degree, to_reference(t, self.T))


@dataclass(frozen=True, eq=False)
class Expansion:
    """Sum_k v_k S_k^{a,b}(t): coeficientes inmutables en la base del peso dado."""
    weight: JacobiWeight
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _frozen_array(self.coeffs, 'coeffs')
        if coeffs.size == 0:
            raise DomainError("an expansion needs at least one coefficient")
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        values = self.weight.vandermonde(self.degree, t) @ self.coeffs
        return float(values[0]) if scalar else values

    def padded(self, degree: int) -> 'Expansion':
        if degree < self.degree:
            raise DomainError(f"cannot pad a degree-{self.degree} expansion down to {degree}")
        coeffs = np.zeros(degree + 1)
        coeffs[:self.coeffs.size] = self.coeffs
        return Expansion(self.weight, coeffs)

    def truncated(self, degree: int) -> 'Expansion':
        return Expansion(self.weight, self.coeffs[:degree + 1])

    def _aligned(self, other: 'Expansion'):
        if other.weight != self.weight:
            raise DomainError("expansions live in different bases")
        degree = max(self.degree, other.degree)
        return self.padded(degree).coeffs, other.padded(degree).coeffs

    def __add__(self, other: 'Expansion') -> 'Expansion':
        mine, theirs = self._aligned(other)
        return Expansion(self.weight, mine + theirs)

    def __sub__(self, other: 'Expansion') -> 'Expansion':
        mine, theirs = self._aligned(other)
        return Expansion(self.weight, mine - theirs)

    def __mul__(self, factor: float) -> 'Expansion':
        return Expansion(self.weight, float(factor) * self.coeffs)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """sum_i w_i p(x_i) ~ <p, 1>_{mu^{a,b}}"""
    weight: JacobiWeight
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = _frozen_array(self.nodes, 'nodes')
        weights = _frozen_array(self.weights, 'weights')
        if nodes.shape != weights.shape:
            raise DomainError("nodes and weights must have the same length")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'weights', weights)

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))


LEFT = 'left'
RIGHT = 'right'
DERIVATIVE = 'derivative'
INTEGRAL = 'integral'


@dataclass(frozen=True, eq=False)
class WeightedFracImage:
    """
    Imagen de una expansión por un operador de Riemann-Liouville de orden theta:

        sum_k c_k * omega(t) * S_k^{weight}(t)

    con omega(t) = t^{-+theta} (side='left') o (T - t)^{-+theta} (side='right');
    el signo es negativo para derivadas y positivo para integrales.
    """
    theta: float
    side: str
    weight: JacobiWeight
    coeffs: np.ndarray
    kind: str = DERIVATIVE

    def __post_init__(self):
        if not (0.0 < self.theta < 1.0):
            raise DomainError(f"theta must lie in (0, 1), got {self.theta}")
        if self.side not in (LEFT, RIGHT):
            raise DomainError(f"side must be '{LEFT}' or '{RIGHT}', got {self.side!r}")
        if self.kind not in (DERIVATIVE, INTEGRAL):
            raise DomainError(f"kind must be '{DERIVATIVE}' or '{INTEGRAL}', got {self.kind!r}")
        object.__setattr__(self, 'coeffs', _frozen_array(self.coeffs, 'coeffs'))

    @property
    def exponent(self) -> float:
        return -self.theta if self.kind == DERIVATIVE else self.theta

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        base = t if self.side == LEFT else self.weight.T - t
        return base ** self.exponent

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        degree = self.coeffs.size - 1
        values = self.omega(np.atleast_1d(t)) * (self.weight.vandermonde(degree, t) @ self.coeffs)
        return float(values[0]) if scalar else values
