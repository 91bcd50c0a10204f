import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from apps.core.exceptions import DomainError
from apps.jacobi.models import JacobiWeight

NORM_NAMES = ('E1', 'E2', 'L2L2')


@dataclass(frozen=True)
class RateFit:
    """log(error) ~ slope * log(M) + intercept; residual es la raíz del error cuadrático medio en log."""
    slope: float
    intercept: float
    residual: float
    points: int


@dataclass(frozen=True)
class ErrorReport:
    """
    Errores de una corrida (alpha, parámetro) sobre la grilla de grados M.

    param es el parámetro propio del ejemplo (beta, gamma o lambda).
    """
    alpha: float
    param: float
    h: float
    Ms: Tuple[int, ...]
    E1: Tuple[float, ...]
    E2: Tuple[float, ...]
    L2L2: Optional[Tuple[float, ...]] = None
    fits: Dict[str, RateFit] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        Ms = tuple(int(M) for M in self.Ms)
        if any(b <= a for a, b in zip(Ms, Ms[1:])):
            raise DomainError(f"M values must be strictly ascending, got {Ms}")
        object.__setattr__(self, 'Ms', Ms)
        for name in NORM_NAMES:
            values = getattr(self, name)
            if values is None:
                continue
            values = tuple(float(v) for v in values)
            if len(values) != len(Ms):
                raise DomainError(f"{name} has {len(values)} values for {len(Ms)} M values")
            if not all(math.isfinite(v) and v >= 0 for v in values):
                raise DomainError(f"{name} errors must be finite and nonnegative")
            object.__setattr__(self, name, values)

    @property
    def columns(self) -> Tuple[str, ...]:
        return NORM_NAMES if self.L2L2 is not None else NORM_NAMES[:2]

    def rows(self):
        for i, M in enumerate(self.Ms):
            yield M, {name: getattr(self, name)[i] for name in self.columns}


@dataclass(frozen=True)
class BesovSpec:
    """Escala B^gamma_{-alpha,0}(0, T) con pesos xi_k^{-alpha,0}."""
    gamma: float
    alpha: float
    T: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"Besov smoothness must be nonnegative, got {self.gamma}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def weight(self) -> JacobiWeight:
        return JacobiWeight(-self.alpha, 0.0, self.T)


@dataclass(frozen=True)
class ProjectionErrorRow:
    """Error de (I - Pi_M) y en L^2_{mu^{-alpha,0}} y en la seminorma H^{alpha/2}."""
    M: int
    weighted_l2: float
    seminorm: float
