"""
Ejecución de experimentos: estudios de convergencia, evaluación de Mittag-Leffler
y diagnósticos de Besov.

Los pares (alpha, param) se calculan en paralelo; los archivos se escriben
después, en el orden de la configuración, así dos corridas dan bytes idénticos.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from apps.core.exceptions import DegenerateFitError
from apps.core.models import SolverSettings
from apps.fem1d.models import Mesh1D
from apps.frac_ode.models import ConstantForcing, FracOdeProblem, ZeroForcing
from apps.frac_ode.services import l2_distance
from apps.frac_ode.services import solve as solve_ode
from apps.jacobi.models import Expansion, JacobiWeight
from apps.jacobi.services import project
from apps.norms.models import BesovSpec, ErrorReport, RateFit
from apps.norms.serializers import report_to_csv, report_to_dat, summary_to_csv
from apps.norms.services import (
    besov_norm,
    decay_fit,
    err_HalphaL2,
    err_L2H1,
    err_L2L2,
    halpha_norm,
    projection_errors,
    rate_fit,
)
from apps.spacetime.data import EXAMPLES
from apps.spacetime.services import project_semidiscrete, semidiscrete_exact
from apps.spacetime.services import solve as solve_pde
from apps.special_fn.models import MLArgs, ScalarOdeData
from apps.special_fn.services import exact_constant_forcing, exact_homogeneous, ml, ml_integral, ml_series
from .models import SINGULAR_TOLERANCE, ExperimentConfig, ExperimentResult
from .serializers import table_to_csv

logger = logging.getLogger(__name__)

DECAY_RANGE = (10, 60)
ML_METHODS = {'auto': ml, 'series': ml_series, 'integral': ml_integral}


def predicted_slopes(kind: str, alpha: float, param: float, theta: int = 0) -> Dict[str, float]:
    """
    Pendientes esperadas de log(error) contra log(M).

    Sólo se devuelven las normas cuya tasa se conoce en ese rango de parámetros;
    el resto se reporta sin verificar.
    """
    if kind == 'ode':
        return {'E1': -(1 + 2 * alpha)}
    if kind == 'example51':
        return {'E1': -(1 + 2 * param), 'E2': alpha - 1 - 2 * param}
    if kind == 'example52':
        if theta == 0:
            return {'E1': -(1 + 2 * alpha), 'E2': -(1 + alpha)}
        gamma = param
        slope = -1 - alpha * (gamma - 1)
        out = {}
        if -0.5 < gamma < 3:
            out['E1'] = slope
        if -0.1 < gamma < 2:
            out['E2'] = slope
        return out
    if kind == 'example53':
        gamma = param
        return {
            'E1': -1 - alpha * (gamma + 1) if gamma < 1 else -1 - 2 * alpha,
            'E2': -1 - alpha * (gamma + 1) if gamma < 0 else -1 - alpha,
        }
    if kind == 'besov-report':
        return {'decay': -2 - 2 * alpha, 'weighted_l2': -1 - 2 * alpha, 'seminorm': -1 - alpha}
    return {}


def slope_tolerance(config: ExperimentConfig) -> float:
    singular = (config.kind == 'example52' and config.theta == 1) or config.kind in ('example53', 'besov-report')
    return max(config.tolerance, SINGULAR_TOLERANCE) if singular else config.tolerance


def _fits(Ms, columns: Dict[str, Tuple[float, ...]]) -> Dict[str, RateFit]:
    """Pendientes de cada columna sobre la cola de grados configurada en RATE_FIT_TAIL."""
    tail = SolverSettings.load().fit_tail or None
    fits = {}
    for name, errors in columns.items():
        try:
            fits[name] = rate_fit(Ms, errors, tail=tail)
        except DegenerateFitError as exc:
            logger.warning(f"No rate for {name}: {exc}")
    return fits


def _ode_exact(config: ExperimentConfig, alpha: float, lam: float):
    if config.ode_source == 'constant':
        data = ScalarOdeData(alpha, lam, 0.0)

        def exact(t):
            return exact_constant_forcing(data, t)

        return data, ConstantForcing(1.0), exact
    data = ScalarOdeData(alpha, lam, config.y0)

    def exact(t):
        return exact_homogeneous(data, t)

    return data, ZeroForcing(), exact


class ExperimentService:
    """
    Orquesta los experimentos descritos por un ExperimentConfig.

    Todos los métodos son estáticos: la configuración viaja completa en cada llamada.
    """

    @staticmethod
    def plan(config: ExperimentConfig) -> List[str]:
        """Descripción legible del plan efectivo (lo que imprime validate_experiment)."""
        lines = [f"kind: {config.kind}", f"alphas: {list(config.alphas)}", f"params: {list(config.params)}"]
        if config.kind == 'ml-eval':
            lines.append(f"t: {list(config.t_values)}")
            lines.append(f"method: {config.ml_method}")
        else:
            lines.append(f"Ms: {list(config.Ms)}")
        if config.kind == 'example52':
            lines.append(f"theta: {config.theta}")
        if config.kind == 'ode':
            lines.append(f"source: {config.ode_source} (y0={0.0 if config.ode_source == 'constant' else config.y0})")
        if config.is_pde:
            lines.append(f"h: 2^-{config.h_exp}")
            reference = f"numerical (M={config.reference_m})" if config.reference == 'numerical' \
                else f"ml-exact (degree {config.degree})"
            lines.append(f"reference: {reference}")
        if config.kind == 'besov-report':
            lines.append(f"degree: {config.degree}, projection: {config.projection}")
        for alpha, param in config.pairs:
            slopes = predicted_slopes(config.kind, alpha, param, config.theta)
            if slopes:
                formatted = ', '.join(f"{name}={value:.4f}" for name, value in slopes.items())
                lines.append(f"predicted ({alpha!r}, {param!r}): {formatted}")
        lines.append(f"tolerance: {slope_tolerance(config)!r}")
        lines.append(f"output: {config.output}")
        return lines

    @staticmethod
    def validate(config: ExperimentConfig) -> List[str]:
        """
        Chequea que los datos de cada par se puedan construir y devuelve el plan.

        Raises:
            DomainError: si algún par no tiene datos válidos
        """
        for alpha, param in config.pairs:
            if config.is_pde:
                ExperimentService._problem(config, alpha, param)
            elif config.kind == 'ml-eval':
                for t in config.t_values:
                    MLArgs(alpha, param, t)
            elif config.kind in ('ode', 'besov-report'):
                _ode_exact(config, alpha, param)
        return ExperimentService.plan(config)

    @staticmethod
    def _problem(config: ExperimentConfig, alpha: float, param: float):
        if config.kind == 'example52':
            return EXAMPLES[config.kind](alpha, param, config.theta)
        return EXAMPLES[config.kind](alpha, param)

    # ------------------------------------------------------------------
    # corridas por par
    # ------------------------------------------------------------------

    @staticmethod
    def ode_report(config: ExperimentConfig, alpha: float, lam: float) -> ErrorReport:
        """E1 = ||y_M - y||_{L^2}, E2 = ||y_M - y||_{H^{alpha/2}} contra Mittag-Leffler."""
        data, forcing, exact = _ode_exact(config, alpha, lam)
        problem = FracOdeProblem(data, forcing)
        reference = project(exact, JacobiWeight.legendre(data.T), config.degree, composite=True)
        E1, E2 = [], []
        for M in config.Ms:
            sol = solve_ode(problem, M)
            E1.append(l2_distance(sol, exact))
            approx = sol.poly + Expansion(sol.poly.weight, [sol.offset])
            E2.append(halpha_norm(approx - reference, alpha))
        fits = _fits(config.Ms, {'E1': E1, 'E2': E2})
        return ErrorReport(alpha, lam, 0.0, config.Ms, E1, E2, fits=fits)

    @staticmethod
    def pde_report(config: ExperimentConfig, alpha: float, param: float, max_workers: int = 1) -> ErrorReport:
        """Errores E1, E2 (y L2L2) de la solución completa contra una referencia en la misma malla."""
        spec = ExperimentService._problem(config, alpha, param)
        mesh = Mesh1D.uniform(config.h_exp)
        if config.reference == 'ml-exact':
            reference = project_semidiscrete(semidiscrete_exact(spec, mesh), config.degree)
        else:
            reference = solve_pde(spec, config.reference_m, mesh, max_workers)
        E1, E2, L2L2 = [], [], []
        for M in config.Ms:
            diff = reference - solve_pde(spec, M, mesh, max_workers)
            E1.append(err_L2H1(diff, mesh))
            E2.append(err_HalphaL2(diff, mesh, alpha))
            L2L2.append(err_L2L2(diff, mesh))
        columns = {'E1': E1, 'E2': E2}
        if config.include_l2:
            columns['L2L2'] = L2L2
        return ErrorReport(alpha, param, mesh.h, config.Ms, E1, E2, L2L2 if config.include_l2 else None,
                           fits=_fits(config.Ms, columns))

    @staticmethod
    def besov_tables(config: ExperimentConfig, alpha: float, lam: float):
        """
        Pendiente de decaimiento de los pares <y, S_k>, normas de Besov alrededor
        del umbral 1 + 2 alpha y, opcionalmente, errores de proyección por M.
        """
        _, _, exact = _ode_exact(config, alpha, lam)
        spec = BesovSpec(1 + 2 * alpha, alpha)
        y = project(exact, spec.weight, config.degree, composite=True)
        decay = decay_fit(y, *DECAY_RANGE, use_pairings=True)
        half = config.degree // 2
        besov_rows = []
        for gamma in (spec.gamma - 0.2, spec.gamma + 0.2):
            low, high = besov_norm(y.truncated(half), gamma), besov_norm(y, gamma)
            besov_rows.append((alpha, lam, gamma, half, low, high / low))
        projection_rows = projection_errors(exact, alpha, config.Ms, reference_degree=config.degree) \
            if config.projection else []
        return decay, besov_rows, projection_rows

    # ------------------------------------------------------------------
    # orquestación
    # ------------------------------------------------------------------

    @staticmethod
    def run(config: ExperimentConfig, max_workers: Optional[int] = None) -> ExperimentResult:
        """
        Ejecuta el experimento y escribe sus archivos en config.output.

        Returns:
            ExperimentResult con los reportes, el resumen de pendientes y los archivos escritos

        Raises:
            DomainError: datos inválidos para algún par
        """
        cfg = SolverSettings.load()
        workers = cfg.max_workers if max_workers is None else max_workers
        output = Path(config.output if config.output is not None else cfg.output_dir)
        output.mkdir(parents=True, exist_ok=True)
        logger.info(f"Running {config.kind} over {len(config.pairs)} pairs into {output}")

        if config.kind == 'ml-eval':
            return ExperimentService._run_ml_eval(config, output)
        if config.kind == 'besov-report':
            return ExperimentService._run_besov(config, output, workers)

        def one_pair(pair):
            alpha, param = pair
            if config.kind == 'ode':
                return ExperimentService.ode_report(config, alpha, param)
            return ExperimentService.pde_report(config, alpha, param)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one_pair, config.pairs))

        tolerance = slope_tolerance(config)
        files, summary = [], []
        for report in reports:
            stem = config.stem(report.alpha, report.param)
            files.append(_write(output / f"{stem}.csv", report_to_csv(report)))
            files.append(_write(output / f"{stem}.dat", report_to_dat(report)))
            predicted = predicted_slopes(config.kind, report.alpha, report.param, config.theta)
            slopes = {name: fit.slope for name, fit in report.fits.items()}
            summary.extend(_summary_rows(report.alpha, report.param, slopes, predicted, tolerance))
        files.append(_write(output / 'summary.csv', summary_to_csv(summary)))
        return _finish(config, tuple(reports), summary, files, predicted_count=_expected_rows(config))

    @staticmethod
    def _run_ml_eval(config: ExperimentConfig, output: Path) -> ExperimentResult:
        evaluate = ML_METHODS[config.ml_method]
        rows = []
        for alpha, beta in config.pairs:
            for t in config.t_values:
                rows.append((alpha, beta, t, evaluate(MLArgs(alpha, beta, t))))
        files = [_write(output / 'ml_eval.csv', table_to_csv(['alpha', 'beta', 't', 'value'], rows))]
        return _finish(config, (), [], files)

    @staticmethod
    def _run_besov(config: ExperimentConfig, output: Path, workers: int) -> ExperimentResult:
        def one_pair(pair):
            return ExperimentService.besov_tables(config, *pair)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(one_pair, config.pairs))

        tolerance = slope_tolerance(config)
        summary, besov_rows, projection_rows = [], [], []
        for (alpha, lam), (decay, besov, projection) in zip(config.pairs, tables):
            slopes = {'decay': decay}
            besov_rows.extend(besov)
            if projection:
                Ms = [row.M for row in projection]
                fits = _fits(Ms, {
                    'weighted_l2': [row.weighted_l2 for row in projection],
                    'seminorm': [row.seminorm for row in projection],
                })
                slopes.update({name: fit.slope for name, fit in fits.items()})
                projection_rows.extend((row.M, alpha, lam, row.weighted_l2, row.seminorm) for row in projection)
            predicted = predicted_slopes(config.kind, alpha, lam)
            if not config.projection:
                predicted = {'decay': predicted['decay']}
            summary.extend(_summary_rows(alpha, lam, slopes, predicted, tolerance))

        files = [_write(output / 'besov.csv', table_to_csv(
            ['alpha', 'param', 'gamma', 'half_degree', 'norm_half', 'growth'], besov_rows))]
        if config.projection:
            files.append(_write(output / 'projection.csv', table_to_csv(
                ['M', 'alpha', 'param', 'weighted_l2', 'seminorm'], projection_rows)))
        files.append(_write(output / 'summary.csv', summary_to_csv(summary)))
        return _finish(config, (), summary, files, predicted_count=_expected_rows(config))


def _summary_rows(alpha, param, slopes: Dict[str, float], predicted, tolerance) -> List[dict]:
    rows = []
    for name, expected in predicted.items():
        slope = slopes.get(name)
        if slope is None:
            continue
        ok = abs(slope - expected) <= tolerance
        if not ok:
            logger.warning(f"{name} slope {slope:.3f} for ({alpha!r}, {param!r}) misses {expected:.3f} +- {tolerance}")
        rows.append({'alpha': alpha, 'param': param, 'norm': name, 'slope': slope,
                     'predicted': expected, 'tolerance': tolerance, 'ok': ok})
    return rows


def _expected_rows(config: ExperimentConfig) -> int:
    count = 0
    for alpha, param in config.pairs:
        predicted = predicted_slopes(config.kind, alpha, param, config.theta)
        if config.kind == 'besov-report' and not config.projection:
            predicted = {'decay': predicted['decay']}
        count += len(predicted)
    return count


def _finish(config, reports, summary, files, predicted_count: int = 0) -> ExperimentResult:
    failures = []
    if len(summary) < predicted_count:
        failures.append(f"{predicted_count - len(summary)} predicted slopes could not be fitted")
    for row in summary:
        if not row['ok']:
            failures.append(f"{row['norm']} ({row['alpha']!r}, {row['param']!r}): {row['slope']:.4f} vs {row['predicted']:.4f}")
    if failures:
        logger.warning(f"{len(failures)} slope checks failed")
    logger.info(f"Wrote {len(files)} files")
    return ExperimentResult(config, reports, tuple(summary), tuple(files), tuple(failures))


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding='utf-8')
    logger.debug(f"Wrote {path}")
    return path
