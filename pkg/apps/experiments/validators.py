"""
Ventanas de parámetros de los experimentos.

Cada validador levanta django.core.exceptions.ValidationError con el motivo;
los serializers lo traducen a errores de campo.
"""

from django.core.exceptions import ValidationError


def validate_order(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha debe estar en (0, 1), se recibió {alpha}")


def validate_example51(alpha: float, beta: float) -> None:
    """u = t^beta sin(pi x) requiere beta > (alpha - 1)/2 (desigualdad estricta)."""
    if not beta > (alpha - 1) / 2:
        raise ValidationError(f"example51 requiere beta > (alpha - 1)/2 = {(alpha - 1) / 2:g}, se recibió {beta}")


def validate_example52(alpha: float, gamma: float, theta: int) -> None:
    """
    theta en {0, 1}; con theta = 1, max(-1, 1 - 1/alpha) < gamma < 5/2.

    Además gamma > -1/2 para que u0 = x(1-x)^{gamma-1/2} sea integrable contra las funciones sombrero.
    """
    if theta not in (0, 1):
        raise ValidationError(f"example52 admite theta en {{0, 1}}, se recibió {theta}")
    if theta == 0:
        return
    lower = max(-1.0, 1.0 - 1.0 / alpha)
    if not (lower < gamma < 2.5):
        raise ValidationError(f"example52 requiere {lower:g} < gamma < 5/2, se recibió {gamma}")
    if not gamma > -0.5:
        raise ValidationError(f"example52 con datos en L^2 requiere gamma > -1/2, se recibió {gamma}")


def validate_example53(alpha: float, gamma: float) -> None:
    """f = x^{gamma-1/2}(1-x) requiere -1/2 < gamma < 3/2."""
    if not (-0.5 < gamma < 1.5):
        raise ValidationError(f"example53 requiere -1/2 < gamma < 3/2, se recibió {gamma}")


def validate_ascending(values, name: str) -> None:
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError(f"{name} debe ser estrictamente creciente")
