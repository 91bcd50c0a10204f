from dataclasses import dataclass
from typing import Callable

import numpy as np

from apps.core.exceptions import DomainError


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Nodos 0 = x_0 < ... < x_N = 1; los grados de libertad son los N - 1 nodos interiores."""
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise DomainError("a mesh needs at least one interior node")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise DomainError(f"mesh must span [0, 1], got [{nodes[0]}, {nodes[-1]}]")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, 'nodes', nodes)

    @classmethod
    def uniform(cls, level: int) -> 'Mesh1D':
        """Malla uniforme con h = 2^-level."""
        if level < 1:
            raise DomainError(f"uniform meshes need level >= 1, got {level}")
        return cls(np.linspace(0.0, 1.0, 2 ** level + 1))

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.sizes.max())

    @property
    def n_dofs(self) -> int:
        return self.nodes.size - 2

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def key(self) -> bytes:
        return self.nodes.tobytes()

    def same_as(self, other: 'Mesh1D') -> bool:
        return self is other or np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True, eq=False)
class ModalBasis:
    """
    Autopares discretos K phi = lambda M phi, M-ortonormales.

    Las columnas de eigenvectors son valores nodales interiores de phi_n^h;
    el signo se fija con el primer valor nodal positivo.
    """
    mesh: Mesh1D
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float)
        vectors = np.array(self.eigenvectors, dtype=float)
        n = self.mesh.n_dofs
        if values.shape != (n,) or vectors.shape != (n, n):
            raise DomainError(f"modal basis must hold {n} eigenpairs")
        if np.any(values <= 0) or np.any(np.diff(values) < 0):
            raise DomainError("eigenvalues must be positive and ascending")
        values.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, 'eigenvalues', values)
        object.__setattr__(self, 'eigenvectors', vectors)

    @property
    def size(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class SpatialFunction:
    """
    f(x) = x^left_power (1 - x)^right_power cofactor(x) con potencias conocidas.

    l2_project integra los elementos de borde con Gauss-Jacobi para esas potencias.
    """
    cofactor: Callable
    left_power: float = 0.0
    right_power: float = 0.0

    def __post_init__(self):
        if not (self.left_power > -1 and self.right_power > -1):
            raise DomainError("endpoint powers must exceed -1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x ** self.left_power * (1.0 - x) ** self.right_power * np.asarray(self.cofactor(x), dtype=float)

    def scaled(self, factor: float) -> 'SpatialFunction':
        cofactor = self.cofactor
        return SpatialFunction(lambda x: factor * np.asarray(cofactor(x), dtype=float), self.left_power, self.right_power)
