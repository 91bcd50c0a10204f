import logging

from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import DomainError
from apps.experiments.models import ExperimentConfig, ExperimentResult
from apps.experiments.serializers import ExperimentConfigSerializer
from apps.experiments.services import ExperimentService

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
ASSERTION_FAILED = 1


class ExperimentCommand(BaseCommand):
    """
    Base de los subcomandos de experimentos.

    Cada subcomando traduce sus opciones a un documento de configuración; la
    validación y la ejecución son comunes. Errores de configuración terminan con
    código 2 y un --assert fallido con código 1.
    """
    kind = None

    def add_arguments(self, parser):
        parser.add_argument('--out', help='Directorio de salida (por defecto FRACDIFF_OUTPUT_DIR)')
        parser.add_argument('--assert', dest='assert_rates', action='store_true',
                            help='Terminar con código 1 si alguna pendiente sale de tolerancia')
        parser.add_argument('--tol', type=float, help='Tolerancia de pendientes (0.15 por defecto)')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def build_payload(self, options) -> dict:
        raise NotImplementedError

    def load_config(self, payload: dict) -> ExperimentConfig:
        payload = {key: value for key, value in payload.items() if value is not None}
        serializer = ExperimentConfigSerializer(data=payload)
        if not serializer.is_valid():
            logger.error(f"Invalid experiment configuration: {serializer.errors}")
            raise CommandError(f"Configuración inválida: {dict(serializer.errors)}", returncode=USAGE_ERROR)
        return serializer.save()

    def run_config(self, config: ExperimentConfig, assert_rates: bool) -> ExperimentResult:
        try:
            result = ExperimentService.run(config)
        except DomainError as exc:
            logger.error(f"Experiment {config.kind} rejected its data", exc_info=True)
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

        for row in result.summary:
            line = (f"{row['norm']:>11} alpha={row['alpha']!r} param={row['param']!r} "
                    f"slope={row['slope']:.4f} predicted={row['predicted']:.4f}")
            self.stdout.write(self.style.SUCCESS(line) if row['ok'] else self.style.WARNING(line))
        for path in result.files:
            self.stdout.write(f"wrote {path}")

        if assert_rates and not result.all_ok:
            raise CommandError('; '.join(result.failures), returncode=ASSERTION_FAILED)
        return result

    def handle(self, *args, **options):
        payload = self.build_payload(options)
        payload.setdefault('kind', self.kind)
        payload['output'] = options.get('out')
        payload['tolerance'] = options.get('tol')
        config = self.load_config(payload)
        self.run_config(config, options['assert_rates'])
