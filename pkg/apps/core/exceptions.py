"""
Jerarquía de errores del proyecto.

Todos los módulos numéricos lanzan estas excepciones; la capa de comandos
(apps.experiments) las traduce a códigos de salida.
"""


class FracDiffError(Exception):
    """Base de todos los errores del proyecto."""


class DomainError(FracDiffError, ValueError):
    """Argumento fuera del dominio de la operación (polos, pesos inválidos, t = 0 singular...)."""


class AccuracyError(FracDiffError, ArithmeticError):
    """Una serie o cuadratura no alcanzó la tolerancia pedida dentro de su presupuesto."""


class NumericError(FracDiffError, ArithmeticError):
    """Falla de álgebra lineal: sistema singular o problema de autovalores sin converger."""


class DegenerateFitError(FracDiffError, ValueError):
    """Ajuste log-log con menos puntos útiles de los necesarios."""
