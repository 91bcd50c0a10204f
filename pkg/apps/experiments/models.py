from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from apps.norms.models import ErrorReport

KINDS = ['ode', 'example51', 'example52', 'example53', 'ml-eval', 'besov-report']
PDE_KINDS = ('example51', 'example52', 'example53')
REFERENCES = ['numerical', 'ml-exact']
ODE_SOURCES = ['homogeneous', 'constant']
ML_METHOD_CHOICES = ['auto', 'integral', 'series']
DEFAULT_ALPHAS = [0.3, 0.5, 0.7]
DEFAULT_MS = [8, 12, 16, 24, 32, 48, 64]

# ejemplos con datos singulares: pendientes observadas con más ruido
SINGULAR_TOLERANCE = 0.2


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Plan completo y determinista de un experimento.

    params se interpreta según kind: lambda (ode, besov-report), beta
    (example51, ml-eval) o gamma (example52, example53).
    """
    kind: str
    alphas: Tuple[float, ...]
    params: Tuple[float, ...]
    Ms: Tuple[int, ...]
    theta: int = 0
    y0: float = 1.0
    h_exp: int = 10
    reference: str = 'numerical'
    reference_m: int = 150
    ode_source: str = 'homogeneous'
    t_values: Tuple[float, ...] = (1.0,)
    ml_method: str = 'auto'
    degree: int = 200
    projection: bool = False
    include_l2: bool = False
    tolerance: float = 0.15
    output: Optional[Path] = None

    @property
    def pairs(self) -> List[Tuple[float, float]]:
        return [(alpha, param) for alpha in self.alphas for param in self.params]

    @property
    def is_pde(self) -> bool:
        return self.kind in PDE_KINDS

    def stem(self, alpha: float, param: float) -> str:
        """Nombre base de los archivos de un par (alpha, param)."""
        prefix = f"{self.kind}_theta{self.theta}" if self.kind == 'example52' else self.kind
        return f"{prefix}_alpha{alpha!r}_param{param!r}"


@dataclass(frozen=True)
class ExperimentResult:
    """Lo que produjo run(): reportes por par, filas del resumen y archivos escritos."""
    config: ExperimentConfig
    reports: Tuple[ErrorReport, ...] = ()
    summary: Tuple[Dict, ...] = ()
    files: Tuple[Path, ...] = ()
    failures: Tuple[str, ...] = field(default=())

    @property
    def all_ok(self) -> bool:
        return not self.failures and all(row['ok'] for row in self.summary)
