import math
from dataclasses import dataclass

from apps.core.exceptions import DomainError


@dataclass(frozen=True)
class MLArgs:
    """
    Argumentos de E_{alpha,beta}(-t) sobre el eje real negativo.

    alpha = 1 se acepta como límite clásico (exponencial) aunque el
    método solo lo usa con 0 < alpha < 1.
    """
    alpha: float
    beta: float
    t: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta}")
        if not (self.t >= 0.0) or not math.isfinite(self.t):
            raise DomainError(f"t must be a finite nonnegative real, got {self.t}")


@dataclass(frozen=True)
class ScalarOdeData:
    """Datos de D^alpha_{0+}(y - y0) + lambda*y = g en (0, T)."""
    alpha: float
    lam: float
    y0: float
    T: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.lam < 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        if not (self.T > 0):
            raise DomainError(f"T must be positive, got {self.T}")

    def ml_args(self, t: float, beta: float) -> MLArgs:
        """Argumento -lambda*t^alpha empaquetado para ml()."""
        return MLArgs(self.alpha, beta, self.lam * t ** self.alpha)
