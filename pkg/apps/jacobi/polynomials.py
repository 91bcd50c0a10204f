"""
Evaluación de polinomios de Jacobi P_k^{(a,b)} en [-1, 1] por recurrencia de tres términos
(Karniadakis & Sherwin, apéndice B), vectorizada sobre los puntos.
"""

import numpy as np


def jacobi_vandermonde(a: float, b: float, degree: int, x) -> np.ndarray:
    """
    Matriz V[i, k] = P_k^{(a,b)}(x_i), k = 0..degree.

    Args:
        a, b: parámetros clásicos (peso (1-x)^a (1+x)^b)
        degree: grado máximo
        x: puntos en [-1, 1]

    Returns:
        np.ndarray de forma (len(x), degree + 1)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    V = np.empty((x.size, degree + 1))
    V[:, 0] = 1.0
    if degree == 0:
        return V

    apb = a + b
    V[:, 1] = 0.5 * (a - b + (apb + 2.0) * x)
    for k in range(2, degree + 1):
        a1 = 2.0 * k * (k + apb) * (2.0 * k + apb - 2.0)
        a2 = (2.0 * k + apb - 1.0) * (a * a - b * b)
        a3 = (2.0 * k + apb - 2.0) * (2.0 * k + apb - 1.0) * (2.0 * k + apb)
        a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + apb)
        V[:, k] = ((a2 + a3 * x) * V[:, k - 1] - a4 * V[:, k - 2]) / a1
    return V


def to_reference(t, T: float) -> np.ndarray:
    """(0, T) -> (-1, 1)"""
    return 2.0 * np.asarray(t, dtype=float) / T - 1.0
