from dataclasses import dataclass
from pathlib import Path

from django.conf import settings


@dataclass(frozen=True)
class SolverSettings:
    """
    Snapshot inmutable de la configuración numérica.

    Los servicios nunca leen variables de entorno: llaman a SolverSettings.load()
    en cada operación, así override_settings funciona en los tests.
    """
    t_switch: float
    ml_series_tol: float
    ml_max_terms: int
    ml_integral_rtol: float
    quad_extra_nodes: int
    max_degree: int
    k_max: int
    reference_m: int
    reference_h_exp: int
    error_floor: float
    fit_tail: int
    max_workers: int
    output_dir: Path

    @classmethod
    def load(cls) -> 'SolverSettings':
        return cls(
            t_switch=settings.ML_T_SWITCH,
            ml_series_tol=settings.ML_SERIES_TOL,
            ml_max_terms=settings.ML_MAX_TERMS,
            ml_integral_rtol=settings.ML_INTEGRAL_RTOL,
            quad_extra_nodes=settings.QUAD_EXTRA_NODES,
            max_degree=settings.MAX_DEGREE,
            k_max=settings.K_MAX,
            reference_m=settings.REFERENCE_M,
            reference_h_exp=settings.REFERENCE_H_EXP,
            error_floor=settings.ERROR_FLOOR,
            fit_tail=settings.RATE_FIT_TAIL,
            max_workers=max(1, settings.MAX_WORKERS),
            output_dir=Path(settings.OUTPUT_DIR),
        )
