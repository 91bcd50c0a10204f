"""Catálogo de datos de los experimentos numéricos (T = 1, Omega = (0, 1))."""

import numpy as np
from scipy import special

from apps.core.exceptions import DomainError
from apps.fem1d.models import SpatialFunction
from apps.frac_ode.models import ConstantForcing, PowerForcing
from .models import ProblemSpec, SeparableForcing


def sine(x):
    return np.sin(np.pi * np.asarray(x, dtype=float))


def _identity(x):
    return np.asarray(x, dtype=float)


def _one_minus(x):
    return 1.0 - np.asarray(x, dtype=float)


def example51(alpha: float, beta: float, T: float = 1.0) -> ProblemSpec:
    """
    Solución fabricada u = t^beta sin(pi x), u0 = 0.

    f(x, t) = [Gamma(beta+1)/Gamma(beta+1-alpha) t^{beta-alpha} + pi^2 t^beta] sin(pi x)
    """
    if not beta > (alpha - 1) / 2:
        raise DomainError(f"example51 needs beta > (alpha - 1)/2, got beta={beta}, alpha={alpha}")
    ratio = float(np.exp(special.gammaln(beta + 1) - special.gammaln(beta + 1 - alpha)))
    time = PowerForcing(((ratio, beta - alpha), (np.pi ** 2, beta)))
    return ProblemSpec(alpha, T, forcing=SeparableForcing(sine, time, label='manufactured'))


def example52(alpha: float, gamma: float, theta: int, T: float = 1.0) -> ProblemSpec:
    """u0 = theta x (1-x)^{gamma-1/2} + (1-theta) sin(pi x), f = 0; theta en {0, 1}."""
    if theta == 0:
        return ProblemSpec(alpha, T, sine, 'sine')
    if theta == 1:
        u0 = SpatialFunction(_identity, right_power=gamma - 0.5)
        return ProblemSpec(alpha, T, u0, 'power-weighted')
    raise DomainError(f"example52 takes theta in {{0, 1}}, got {theta}")


def example53(alpha: float, gamma: float, T: float = 1.0) -> ProblemSpec:
    """u0 = 0, f(x) = x^{gamma-1/2} (1-x) independiente del tiempo."""
    space = SpatialFunction(_one_minus, left_power=gamma - 0.5)
    return ProblemSpec(alpha, T, forcing=SeparableForcing(space, ConstantForcing(1.0)))


EXAMPLES = {
    'example51': example51,
    'example52': example52,
    'example53': example53,
}
