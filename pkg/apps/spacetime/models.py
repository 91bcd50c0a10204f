from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from apps.core.exceptions import DomainError
from apps.core.models import SolverSettings
from apps.fem1d.models import Mesh1D, ModalBasis, SpatialFunction
from apps.fem1d.services import load_vector
from apps.frac_ode.models import ConstantForcing, Forcing, ScalarSpectralSolution
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import gauss_rule
from apps.special_fn.services import ml_values

U0_TAGS = ('zero', 'sine', 'power-weighted', 'custom')
F_TAGS = ('zero', 'separable', 'manufactured', 'custom')


class SpaceTimeForcing:
    """
    Fuente f(x, t) del problema espacio-temporal.

    nodal_moments(mesh, M, T)[l, k] = <f, L_k psi_l> en (0, T) x (0, 1), con
    psi_l la función sombrero del nodo interior l y L_k el Legendre desplazado.
    """
    tag = 'custom'

    def nodal_moments(self, mesh: Mesh1D, M: int, T: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_time_independent(self) -> bool:
        return False


@dataclass(frozen=True)
class ZeroSource(SpaceTimeForcing):
    tag = 'zero'

    def nodal_moments(self, mesh: Mesh1D, M: int, T: float) -> np.ndarray:
        return np.zeros((mesh.n_dofs, M + 1))

    @property
    def is_time_independent(self) -> bool:
        return True


@dataclass(frozen=True)
class SeparableForcing(SpaceTimeForcing):
    """f(x, t) = space(x) * time(t); refine activa el refinamiento de borde en la carga."""
    space: Callable
    time: Forcing = field(default_factory=ConstantForcing)
    label: str = 'separable'
    refine: bool = False

    def __post_init__(self):
        if self.label not in F_TAGS:
            raise DomainError(f"unknown forcing tag {self.label!r}")

    @property
    def tag(self) -> str:
        return self.label

    def nodal_moments(self, mesh: Mesh1D, M: int, T: float) -> np.ndarray:
        load = load_vector(mesh, self.space, self.refine)
        return np.outer(load, self.time.legendre_moments(M, T))

    @property
    def is_time_independent(self) -> bool:
        return isinstance(self.time, ConstantForcing)


@dataclass(frozen=True)
class CallableSpaceTimeForcing(SpaceTimeForcing):
    """
    f(x, t) = t^left_power * func(x, t) general.

    La carga espacial se evalúa en los nodos de Gauss-Jacobi temporales de peso t^left_power.
    """
    func: Callable
    left_power: float = 0.0
    refine: bool = False
    tag = 'custom'

    def __post_init__(self):
        if not self.left_power > -1:
            raise DomainError(f"left_power must exceed -1, got {self.left_power}")

    def nodal_moments(self, mesh: Mesh1D, M: int, T: float) -> np.ndarray:
        cfg = SolverSettings.load()
        rule = gauss_rule(JacobiWeight(0.0, self.left_power, T), M + cfg.quad_extra_nodes)
        loads = np.column_stack([
            load_vector(mesh, lambda x, s=s: self.func(x, s), self.refine) for s in rule.nodes
        ])
        V = JacobiWeight.legendre(T).vandermonde(M, rule.nodes)
        return loads @ (rule.weights[:, None] * V)


@dataclass(frozen=True)
class ProblemSpec:
    """D^alpha_{0+}(u - u0) - u_xx = f en (0, 1) x (0, T), u = 0 en x = 0, 1."""
    alpha: float
    T: float = 1.0
    u0: Optional[Callable] = None
    u0_tag: str = 'zero'
    forcing: SpaceTimeForcing = field(default_factory=ZeroSource)
    u0_refine: bool = False

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.T > 0):
            raise DomainError(f"T must be positive, got {self.T}")
        if self.u0_tag not in U0_TAGS:
            raise DomainError(f"unknown initial data tag {self.u0_tag!r}")
        if (self.u0 is None) != (self.u0_tag == 'zero'):
            raise DomainError(f"initial data tag {self.u0_tag!r} does not match the given u0")
        if self.forcing.tag not in F_TAGS:
            raise DomainError(f"unknown forcing tag {self.forcing.tag!r}")

    def scaled_initial(self, factor: float) -> 'ProblemSpec':
        if self.u0 is None:
            return self
        u0 = self.u0
        if isinstance(u0, SpatialFunction):
            scaled = u0.scaled(factor)
        else:
            def scaled(x):
                return factor * np.asarray(u0(x), dtype=float)
        return ProblemSpec(self.alpha, self.T, scaled, self.u0_tag, self.forcing, self.u0_refine)


def _evaluate_modes(basis: ModalBasis, Y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_n Y[n, p] phi_n^h(x_p) para cada punto p."""
    mesh = basis.mesh
    nodal = basis.eigenvectors @ Y
    full = np.zeros((mesh.nodes.size, Y.shape[1]))
    full[1:-1] = nodal
    element = np.clip(np.searchsorted(mesh.nodes, x, side='right') - 1, 0, mesh.nodes.size - 2)
    local = (x - mesh.nodes[element]) / mesh.sizes[element]
    columns = np.arange(x.size)
    return full[element, columns] * (1.0 - local) + full[element + 1, columns] * local


class ModalEvaluator:
    """Evaluación puntual común: subclases definen mode_values(t) -> (modos, len(t))."""
    basis: ModalBasis
    T: float

    def mode_values(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("x must lie in [0, 1]")
        if np.any(t < 0) or np.any(t > self.T):
            raise DomainError(f"t must lie in [0, {self.T}]")
        flat_x, flat_t = x.ravel(), t.ravel()
        values = _evaluate_modes(self.basis, self.mode_values(flat_t), flat_x)
        return float(values[0]) if x.ndim == 0 else values.reshape(x.shape)


@dataclass(frozen=True, eq=False)
class SpaceTimeSolution(ModalEvaluator):
    """
    U(x, t) = sum_n [offsets[n] + sum_k coeffs[n, k] L_k(t)] phi_n^h(x).

    Una fila de coeffs por autovector de la malla (sin truncar modos).
    """
    basis: ModalBasis
    offsets: np.ndarray
    coeffs: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        offsets = np.array(self.offsets, dtype=float)
        coeffs = np.array(self.coeffs, dtype=float)
        if offsets.shape != (self.basis.size,) or coeffs.ndim != 2 or coeffs.shape[0] != self.basis.size:
            raise DomainError(f"a space-time solution needs {self.basis.size} modes")
        if not (np.all(np.isfinite(offsets)) and np.all(np.isfinite(coeffs))):
            raise DomainError("space-time coefficients must be finite")
        offsets.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, 'offsets', offsets)
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def mesh(self) -> Mesh1D:
        return self.basis.mesh

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def modes(self) -> List[ScalarSpectralSolution]:
        legendre = JacobiWeight.legendre(self.T)
        return [ScalarSpectralSolution(float(y0), Expansion(legendre, c)) for y0, c in zip(self.offsets, self.coeffs)]

    def mode_values(self, t: np.ndarray) -> np.ndarray:
        V = JacobiWeight.legendre(self.T).vandermonde(self.degree, t)
        return self.offsets[:, None] + self.coeffs @ V.T

    def padded(self, degree: int) -> 'SpaceTimeSolution':
        if degree < self.degree:
            raise DomainError(f"cannot pad degree {self.degree} down to {degree}")
        coeffs = np.zeros((self.basis.size, degree + 1))
        coeffs[:, :self.degree + 1] = self.coeffs
        return SpaceTimeSolution(self.basis, self.offsets, coeffs, self.T)

    def __sub__(self, other: 'SpaceTimeSolution') -> 'SpaceTimeSolution':
        if not self.mesh.same_as(other.mesh):
            raise DomainError("space-time solutions live on different meshes")
        if self.T != other.T:
            raise DomainError(f"space-time solutions have different horizons ({self.T}, {other.T})")
        degree = max(self.degree, other.degree)
        mine, theirs = self.padded(degree), other.padded(degree)
        return SpaceTimeSolution(self.basis, mine.offsets - theirs.offsets, mine.coeffs - theirs.coeffs, self.T)

    def __mul__(self, factor: float) -> 'SpaceTimeSolution':
        return SpaceTimeSolution(self.basis, factor * self.offsets, factor * self.coeffs, self.T)

    __rmul__ = __mul__

    def time_l2_squared(self) -> np.ndarray:
        """int_0^T y_n(t)^2 dt por modo, exacto por ortogonalidad de Legendre."""
        mass = self.T / (2.0 * np.arange(self.degree + 1) + 1.0)
        cross = 2.0 * self.offsets * self.coeffs[:, 0] * self.T
        return self.offsets ** 2 * self.T + cross + (self.coeffs ** 2) @ mass


@dataclass(frozen=True, eq=False)
class SemidiscreteSolution(ModalEvaluator):
    """
    Solución exacta del problema semidiscreto (espacio discreto, tiempo continuo):

        y_n(t) = y0[n] E_{alpha,1}(-lambda_n t^alpha) + f[n] t^alpha E_{alpha,alpha+1}(-lambda_n t^alpha)
    """
    basis: ModalBasis
    alpha: float
    y0: np.ndarray
    f: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        y0 = np.array(self.y0, dtype=float)
        f = np.array(self.f, dtype=float)
        if y0.shape != (self.basis.size,) or f.shape != (self.basis.size,):
            raise DomainError(f"semidiscrete data must hold {self.basis.size} modal values")
        y0.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, 'y0', y0)
        object.__setattr__(self, 'f', f)

    def mode_values(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        tau = t ** self.alpha
        z = np.outer(self.basis.eigenvalues, tau)
        values = self.y0[:, None] * ml_values(self.alpha, 1.0, z)
        if np.any(self.f):
            values += self.f[:, None] * tau[None, :] * ml_values(self.alpha, self.alpha + 1.0, z)
        return values
