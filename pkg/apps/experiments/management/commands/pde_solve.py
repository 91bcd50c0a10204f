import numpy as np
from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import DomainError
from apps.fem1d.models import Mesh1D
from apps.spacetime.data import EXAMPLES
from apps.spacetime.services import evaluate, solve
from ._base import USAGE_ERROR


class Command(BaseCommand):
    help = 'Resuelve un ejemplo espacio-temporal y evalúa U en los puntos (x, t) pedidos'

    def add_arguments(self, parser):
        parser.add_argument('--example', choices=['51', '52', '53'], required=True)
        parser.add_argument('--alpha', type=float, required=True)
        parser.add_argument('--param', type=float, required=True, help='beta para 51, gamma para 52 y 53')
        parser.add_argument('--theta', type=int, default=0)
        parser.add_argument('--M', type=int, default=32)
        parser.add_argument('--h-exp', type=int, default=6, dest='h_exp')
        parser.add_argument('--x', type=float, nargs='+', default=[0.5])
        parser.add_argument('--t', type=float, nargs='+', default=[1.0])

    def handle(self, *args, **options):
        kind = f"example{options['example']}"
        try:
            if kind == 'example52':
                spec = EXAMPLES[kind](options['alpha'], options['param'], options['theta'])
            else:
                spec = EXAMPLES[kind](options['alpha'], options['param'])
            mesh = Mesh1D.uniform(options['h_exp'])
            sol = solve(spec, options['M'], mesh)
            x, t = np.meshgrid(options['x'], options['t'], indexing='ij')
            values = evaluate(sol, x, t)
        except DomainError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc

        self.stdout.write('x,t,U')
        for x_value, t_value, value in zip(x.ravel(), t.ravel(), np.ravel(values)):
            self.stdout.write(f"{float(x_value)!r},{float(t_value)!r},{float(value)!r}")
