import json
import math
import tempfile
from io import StringIO
from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from apps.fem1d.models import Mesh1D
from apps.norms.serializers import report_from_csv
from apps.spacetime.data import example52
from apps.spacetime.services import semidiscrete_exact
from apps.special_fn.models import MLArgs
from apps.special_fn.services import ml_integral, ml_series
from .models import DEFAULT_MS, ExperimentConfig
from .serializers import ExperimentConfigSerializer
from .services import ExperimentService, _expected_rows, predicted_slopes, slope_tolerance
from .validators import validate_example51, validate_example52, validate_example53


def build(**payload) -> ExperimentConfig:
    serializer = ExperimentConfigSerializer(data=payload)
    assert serializer.is_valid(), serializer.errors
    return serializer.save()


def errors_for(**payload) -> dict:
    serializer = ExperimentConfigSerializer(data=payload)
    assert not serializer.is_valid()
    return serializer.errors


class ValidatorTests(SimpleTestCase):

    def test_example51_boundary_is_open(self):
        with self.assertRaises(ValidationError):
            validate_example51(0.5, -0.25)
        validate_example51(0.5, -0.2)

    def test_example52_windows(self):
        validate_example52(0.5, 3.5, 0)
        with self.assertRaises(ValidationError):
            validate_example52(0.5, 3.5, 1)
        with self.assertRaises(ValidationError):
            validate_example52(0.5, 1.0, 2)
        # con alpha = 0.8 la cota inferior es 1 - 1/alpha = -0.25
        with self.assertRaises(ValidationError):
            validate_example52(0.8, -0.3, 1)
        validate_example52(0.8, -0.2, 1)

    def test_example53_window(self):
        for gamma in (-0.5, 1.5):
            with self.assertRaises(ValidationError):
                validate_example53(0.5, gamma)
        validate_example53(0.5, -0.2)


class ExperimentConfigSerializerTests(SimpleTestCase):

    def test_defaults(self):
        config = build(kind='ode')
        self.assertEqual(config.alphas, (0.3, 0.5, 0.7))
        self.assertEqual(config.Ms, tuple(DEFAULT_MS))
        self.assertEqual(config.h_exp, 10)
        self.assertEqual(config.reference_m, 150)
        self.assertEqual(config.degree, 200)
        self.assertEqual(config.tolerance, 0.15)
        self.assertEqual(len(config.pairs), 3)

    @override_settings(OUTPUT_DIR='/tmp/fracdiff-results')
    def test_output_defaults_to_settings(self):
        self.assertEqual(build(kind='ode').output, Path('/tmp/fracdiff-results'))

    def test_example52_gamma_out_of_range(self):
        errors = errors_for(kind='example52', alphas=[0.5], params=[3.5], theta=1)
        self.assertIn('params', errors)

    def test_example51_open_inequality(self):
        errors = errors_for(kind='example51', alphas=[0.5], params=[-0.25])
        self.assertIn('params', errors)

    def test_example53_gamma_window(self):
        self.assertIn('params', errors_for(kind='example53', alphas=[0.5], params=[1.5]))
        self.assertEqual(build(kind='example53', alphas=[0.5], params=[-0.2]).params, (-0.2,))

    def test_unsorted_degrees(self):
        self.assertIn('Ms', errors_for(kind='ode', Ms=[8, 16, 12]))
        self.assertIn('Ms', errors_for(kind='ode', Ms=[8, 8, 12]))

    def test_ml_exact_needs_time_independent_source(self):
        self.assertIn('reference', errors_for(kind='example51', alphas=[0.5], params=[0.75], reference='ml-exact'))
        build(kind='example53', alphas=[0.5], params=[0.5], reference='ml-exact')

    def test_reference_above_degrees(self):
        self.assertIn('Ms', errors_for(kind='example52', alphas=[0.4], Ms=[8, 16, 160]))

    def test_order_ranges(self):
        self.assertIn('alphas', errors_for(kind='ode', alphas=[1.0]))
        self.assertEqual(build(kind='ml-eval', alphas=[1.0], params=[1.0]).alphas, (1.0,))

    def test_unknown_kind(self):
        self.assertIn('kind', errors_for(kind='example54'))


class PredictedSlopeTests(SimpleTestCase):

    def test_fixed_rates(self):
        self.assertEqual(predicted_slopes('ode', 0.5, 1.0), {'E1': -2.0})
        slopes = predicted_slopes('example51', 0.5, 0.75)
        self.assertAlmostEqual(slopes['E1'], -2.5)
        self.assertAlmostEqual(slopes['E2'], -2.0)
        slopes = predicted_slopes('example52', 0.4, 1.0, theta=0)
        self.assertAlmostEqual(slopes['E1'], -1.8)
        self.assertAlmostEqual(slopes['E2'], -1.4)

    def test_example52_observed_windows(self):
        slopes = predicted_slopes('example52', 0.5, 1.5, theta=1)
        self.assertAlmostEqual(slopes['E1'], -1.25)
        self.assertAlmostEqual(slopes['E2'], -1.25)
        self.assertEqual(set(predicted_slopes('example52', 0.5, 2.2, theta=1)), {'E1'})
        self.assertEqual(predicted_slopes('example52', 0.5, 3.2, theta=1), {})

    def test_example53_saturation(self):
        self.assertAlmostEqual(predicted_slopes('example53', 0.5, 0.5)['E1'], -1.75)
        self.assertAlmostEqual(predicted_slopes('example53', 0.5, 1.2)['E1'], -2.0)
        self.assertAlmostEqual(predicted_slopes('example53', 0.5, -0.2)['E2'], -1.4)
        self.assertAlmostEqual(predicted_slopes('example53', 0.5, 0.5)['E2'], -1.5)

    def test_singular_cases_widen_tolerance(self):
        self.assertEqual(slope_tolerance(build(kind='example53', alphas=[0.5], params=[0.5])), 0.2)
        self.assertEqual(slope_tolerance(build(kind='example52', alphas=[0.4], params=[1.0])), 0.15)


class ExperimentRunTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_ode_convergence(self):
        config = build(kind='ode', alphas=[0.5], params=[1.0], output=str(self.out))
        result = ExperimentService.run(config)
        self.assertTrue(result.all_ok, result.failures)
        self.assertAlmostEqual(result.summary[0]['slope'], -2.0, delta=0.15)
        csv_text = (self.out / f"{config.stem(0.5, 1.0)}.csv").read_text()
        self.assertEqual(csv_text.splitlines()[0], 'M,h,alpha,param,E1,E2')
        report = report_from_csv(csv_text)
        self.assertEqual(report.Ms, tuple(DEFAULT_MS))
        self.assertEqual(report.E1, result.reports[0].E1)
        self.assertTrue((self.out / 'summary.csv').exists())

    def test_pde_run_is_deterministic(self):
        payload = dict(kind='example52', alphas=[0.4, 0.6], params=[1.0], theta=0, Ms=[4, 6, 8, 10, 12, 16],
                       h_exp=3, reference_m=40, include_l2=True)
        first = ExperimentService.run(build(output=str(self.out / 'a'), **payload))
        second = ExperimentService.run(build(output=str(self.out / 'b'), **payload))
        names = [path.name for path in first.files]
        self.assertEqual(names, [path.name for path in second.files])
        for name in names:
            self.assertEqual((self.out / 'a' / name).read_bytes(), (self.out / 'b' / name).read_bytes())
        header = (self.out / 'a' / names[0]).read_text().splitlines()[0]
        self.assertEqual(header, 'M,h,alpha,param,E1,E2,L2L2')
        self.assertEqual([report.alpha for report in first.reports], [0.4, 0.6])
        self.assertEqual(first.reports[0].h, 0.125)

    def test_errors_decrease_with_degree(self):
        config = build(kind='example53', alphas=[0.5], params=[0.5], Ms=[4, 8, 16, 32], h_exp=3,
                       reference='ml-exact', degree=120, output=str(self.out))
        report = ExperimentService.run(config).reports[0]
        self.assertTrue(all(b < a for a, b in zip(report.E1, report.E1[1:])))

    def test_ml_eval_table(self):
        config = build(kind='ml-eval', alphas=[1.0], params=[1.0], t_values=[0.0, 1.0, 5.0], output=str(self.out))
        ExperimentService.run(config)
        lines = (self.out / 'ml_eval.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'alpha,beta,t,value')
        self.assertEqual(len(lines), 4)
        for line in lines[1:]:
            _, _, t, value = (float(part) for part in line.split(','))
            self.assertAlmostEqual(value, math.exp(-t), delta=1e-13)

    def test_ml_eval_uses_requested_method(self):
        config = build(kind='ml-eval', alphas=[0.5], params=[0.5], t_values=[0.5, 2.0], ml_method='integral',
                       output=str(self.out))
        self.assertIn('method: integral', ExperimentService.plan(config))
        ExperimentService.run(config)
        lines = (self.out / 'ml_eval.csv').read_text().splitlines()[1:]
        for line, t in zip(lines, (0.5, 2.0)):
            self.assertEqual(line.split(',')[3], repr(ml_integral(MLArgs(0.5, 0.5, t))))

    def test_besov_report(self):
        config = build(kind='besov-report', alphas=[0.5], params=[1.0], degree=120, projection=True,
                       Ms=[8, 12, 16, 24, 32, 48], output=str(self.out))
        result = ExperimentService.run(config)
        decay = next(row for row in result.summary if row['norm'] == 'decay')
        self.assertTrue(decay['ok'])
        self.assertAlmostEqual(decay['slope'], -3.0, delta=0.2)
        projection = (self.out / 'projection.csv').read_text().splitlines()
        self.assertEqual(projection[0], 'M,alpha,param,weighted_l2,seminorm')
        self.assertEqual(len(projection), 7)
        self.assertTrue((self.out / 'besov.csv').exists())

    def test_plan_echo(self):
        plan = ExperimentService.validate(build(kind='example52', alphas=[0.5], params=[1.5], theta=1))
        self.assertIn('theta: 1', plan)
        self.assertIn('h: 2^-10', plan)
        self.assertTrue(any(line.startswith('predicted (0.5, 1.5)') for line in plan))


class ConvergenceRateTests(SimpleTestCase):
    """
    Pendientes de los ejemplos sobre una malla gruesa.

    La referencia numérica (M = 150) usa la misma malla, así el error medido es
    sólo temporal y h no cambia las tasas.
    """
    tolerance = 0.3

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_rates(self, **payload):
        payload.setdefault('h_exp', 5)
        config = build(tolerance=self.tolerance, output=str(self.out), **payload)
        result = ExperimentService.run(config)
        self.assertTrue(result.all_ok, result.failures)
        self.assertEqual(len(result.summary), _expected_rows(config))
        return result

    def slope(self, result, norm):
        return next(row['slope'] for row in result.summary if row['norm'] == norm)

    def test_example51_smooth_in_time(self):
        result = self.run_rates(kind='example51', alphas=[0.5], params=[0.75])
        self.assertAlmostEqual(self.slope(result, 'E1'), -2.5, delta=self.tolerance)
        self.assertAlmostEqual(self.slope(result, 'E2'), -2.0, delta=self.tolerance)

    def test_example52_sine_initial_data(self):
        # lambda_1 ~ pi^2 retrasa el régimen asintótico: grados más altos y referencia en M = 200
        result = self.run_rates(kind='example52', alphas=[0.4], params=[1.0], theta=0, include_l2=True,
                                Ms=[16, 24, 32, 48, 64, 96], reference_m=200)
        self.assertAlmostEqual(self.slope(result, 'E1'), -1.8, delta=self.tolerance)
        self.assertAlmostEqual(self.slope(result, 'E2'), -1.4, delta=self.tolerance)

        report = result.reports[0]
        self.assertTrue(all(b < a for a, b in zip(report.L2L2, report.L2L2[1:])))
        self.assertAlmostEqual(report.fits['L2L2'].slope, -1.8, delta=self.tolerance)
        for e1, l2 in zip(report.E1, report.L2L2):
            # lambda_1 > pi^2 en la malla, así ||.||_{H^1} domina a pi ||.||_{L^2}
            self.assertGreater(e1, math.pi * l2 * 0.99)

    def test_example53_forcing_below_saturation(self):
        result = self.run_rates(kind='example53', alphas=[0.5], params=[0.5])
        self.assertAlmostEqual(self.slope(result, 'E1'), -1.75, delta=self.tolerance)
        self.assertAlmostEqual(self.slope(result, 'E2'), -1.5, delta=self.tolerance)

    def test_example53_forcing_saturated(self):
        result = self.run_rates(kind='example53', alphas=[0.5], params=[1.2])
        self.assertAlmostEqual(self.slope(result, 'E1'), -2.0, delta=self.tolerance)
        self.assertAlmostEqual(self.slope(result, 'E2'), -1.5, delta=self.tolerance)

    def test_ode_small_order(self):
        result = self.run_rates(kind='ode', alphas=[0.3], params=[1.0])
        self.assertAlmostEqual(self.slope(result, 'E1'), -1.6, delta=0.2)
        self.assertEqual(result.reports[0].fits['E1'].points, 4)

    @override_settings(RATE_FIT_TAIL=0)
    def test_full_range_fit_is_available(self):
        config = build(kind='ode', alphas=[0.3], params=[1.0], output=str(self.out))
        report = ExperimentService.run(config).reports[0]
        self.assertEqual(report.fits['E1'].points, len(DEFAULT_MS))


class CommandTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, payload) -> str:
        path = self.out / 'config.json'
        path.write_text(json.dumps(payload))
        return str(path)

    def test_validate_experiment_echoes_plan(self):
        stdout = StringIO()
        path = self.write_config({'kind': 'example53', 'alphas': [0.5], 'params': [0.5]})
        call_command('validate_experiment', '--config', path, stdout=stdout)
        self.assertIn('kind: example53', stdout.getvalue())

    def test_validate_experiment_rejects_window(self):
        path = self.write_config({'kind': 'example52', 'alphas': [0.5], 'params': [3.5], 'theta': 1})
        with self.assertRaises(CommandError) as ctx:
            call_command('validate_experiment', '--config', path, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unreadable_config(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('run_experiment', '--config', str(self.out / 'missing.json'), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_order_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('ode_converge', '--alpha', '1.0', '--out', str(self.out), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_failed_assertion(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('ode_converge', '--alpha', '0.5', '--M', '8', '12', '16', '24',
                         '--out', str(self.out), '--assert', '--tol', '0', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_run_experiment_writes_files(self):
        path = self.write_config({'kind': 'ode', 'alphas': [0.3], 'params': [1.0], 'Ms': [8, 12, 16, 24, 32]})
        stdout = StringIO()
        call_command('run_experiment', '--config', path, '--out', str(self.out / 'run'), stdout=stdout)
        self.assertTrue((self.out / 'run' / 'summary.csv').exists())
        self.assertIn('wrote', stdout.getvalue())

    def test_pde_converge_rejects_boundary_beta(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('pde_converge', '--example', '51', '--alpha', '0.5', '--param', '-0.25',
                         '--out', str(self.out), stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_ml_eval_method_reaches_csv(self):
        stdout = StringIO()
        call_command('ml_eval', '--alpha', '0.5', '--beta', '1', '--t', '0.5', '--method', 'series',
                     '--out', str(self.out), stdout=stdout)
        expected = repr(ml_series(MLArgs(0.5, 1.0, 0.5)))
        self.assertIn(f"0.5 {expected}", stdout.getvalue())
        row = (self.out / 'ml_eval.csv').read_text().splitlines()[1]
        self.assertEqual(row, f"0.5,1.0,0.5,{expected}")

    def test_ml_eval_prints_values(self):
        stdout = StringIO()
        call_command('ml_eval', '--alpha', '0.5', '--beta', '1', '--t', '0', stdout=stdout)
        self.assertEqual(stdout.getvalue().strip(), '0.0 1.0')

    def test_pde_solve_prints_table(self):
        stdout = StringIO()
        call_command('pde_solve', '--example', '52', '--alpha', '0.5', '--param', '1.0', '--M', '32',
                     '--h-exp', '3', '--x', '0.5', '--t', '0.5', '1', stdout=stdout)
        lines = stdout.getvalue().strip().splitlines()
        self.assertEqual(lines[0], 'x,t,U')
        self.assertEqual(len(lines), 3)
        exact = semidiscrete_exact(example52(0.5, 1.0, theta=0), Mesh1D.uniform(3))
        self.assertAlmostEqual(float(lines[2].split(',')[2]), float(exact(0.5, 1.0)), delta=2e-3)
