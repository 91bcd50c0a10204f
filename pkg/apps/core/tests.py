from django.test import SimpleTestCase, override_settings

from .exceptions import AccuracyError, DegenerateFitError, DomainError, FracDiffError, NumericError
from .models import SolverSettings


class SolverSettingsTests(SimpleTestCase):

    def test_defaults_are_loaded_from_settings(self):
        cfg = SolverSettings.load()
        self.assertEqual(cfg.t_switch, 1.0)
        self.assertEqual(cfg.quad_extra_nodes, 40)
        self.assertEqual(cfg.reference_m, 150)
        self.assertEqual(cfg.reference_h_exp, 10)
        self.assertEqual(cfg.error_floor, 1e-11)
        self.assertEqual(cfg.fit_tail, 4)

    @override_settings(ML_T_SWITCH=2.5, MAX_WORKERS=0)
    def test_override_settings_is_honoured(self):
        cfg = SolverSettings.load()
        self.assertEqual(cfg.t_switch, 2.5)
        # al menos un worker
        self.assertEqual(cfg.max_workers, 1)


class ExceptionHierarchyTests(SimpleTestCase):

    def test_builtin_bases(self):
        self.assertTrue(issubclass(DomainError, ValueError))
        self.assertTrue(issubclass(DegenerateFitError, ValueError))
        self.assertTrue(issubclass(AccuracyError, ArithmeticError))
        self.assertTrue(issubclass(NumericError, ArithmeticError))
        for exc in (DomainError, AccuracyError, NumericError, DegenerateFitError):
            self.assertTrue(issubclass(exc, FracDiffError))
