from django.core.management.base import CommandError

from apps.core.exceptions import DomainError
from apps.experiments.services import ExperimentService
from ._base import USAGE_ERROR, ExperimentCommand
from .run_experiment import read_config


class Command(ExperimentCommand):
    help = 'Valida un documento JSON de experimento e imprime el plan resuelto'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Archivo JSON con la configuración')

    def handle(self, *args, **options):
        config = self.load_config(read_config(options['config']))
        try:
            plan = ExperimentService.validate(config)
        except DomainError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc
        for line in plan:
            self.stdout.write(line)
        self.stdout.write(self.style.SUCCESS('configuración válida'))
