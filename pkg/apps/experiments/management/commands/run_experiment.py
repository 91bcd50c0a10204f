import json
from pathlib import Path

from django.core.management.base import CommandError

from ._base import USAGE_ERROR, ExperimentCommand


def read_config(path: str) -> dict:
    """Lee el documento JSON de configuración; los errores de lectura son errores de uso."""
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandError(f"No se pudo leer {path}: {exc}", returncode=USAGE_ERROR) from exc
    if not isinstance(payload, dict):
        raise CommandError("La configuración debe ser un objeto JSON", returncode=USAGE_ERROR)
    return payload


class Command(ExperimentCommand):
    help = 'Ejecuta un experimento descrito por un documento JSON'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Archivo JSON con la configuración')

    def build_payload(self, options) -> dict:
        return read_config(options['config'])

    def handle(self, *args, **options):
        payload = self.build_payload(options)
        if options.get('out'):
            payload['output'] = options['out']
        if options['tol'] is not None:
            payload['tolerance'] = options['tol']
        config = self.load_config(payload)
        self.run_config(config, options['assert_rates'])
