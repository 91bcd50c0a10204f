import logging

from django.core.management.base import CommandError

from apps.core.exceptions import DomainError, FracDiffError
from apps.experiments.services import ML_METHODS
from apps.special_fn.models import MLArgs
from ._base import ASSERTION_FAILED, USAGE_ERROR, ExperimentCommand

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = 'Evalúa E_{alpha,beta}(-t) en el eje real negativo; con --out escribe ml_eval.csv'
    kind = 'ml-eval'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--alpha', type=float, required=True)
        parser.add_argument('--beta', type=float, default=1.0)
        parser.add_argument('--t', type=float, nargs='+', required=True, dest='t_values')
        parser.add_argument('--method', choices=sorted(ML_METHODS), default='auto')

    def build_payload(self, options) -> dict:
        return {'alphas': [options['alpha']], 'params': [options['beta']], 't_values': options['t_values'],
                'ml_method': options['method']}

    def handle(self, *args, **options):
        payload = self.build_payload(options)
        payload['kind'] = self.kind
        payload['output'] = options.get('out')
        config = self.load_config(payload)
        evaluate = ML_METHODS[config.ml_method]
        for t in config.t_values:
            try:
                value = evaluate(MLArgs(options['alpha'], options['beta'], t))
            except FracDiffError as exc:
                logger.error(f"Mittag-Leffler evaluation failed at t={t!r}", exc_info=True)
                code = USAGE_ERROR if isinstance(exc, DomainError) else ASSERTION_FAILED
                raise CommandError(str(exc), returncode=code) from exc
            self.stdout.write(f"{t!r} {value!r}")
        if options.get('out'):
            self.run_config(config, assert_rates=False)
