from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Decaimiento de coeficientes, normas de Besov y errores de proyección de soluciones de Mittag-Leffler'
    kind = 'besov-report'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--alpha', type=float, nargs='+', dest='alphas')
        parser.add_argument('--lam', type=float, nargs='+', default=[1.0])
        parser.add_argument('--source', choices=['homogeneous', 'constant'], default='homogeneous')
        parser.add_argument('--degree', type=int)
        parser.add_argument('--projection', action='store_true',
                            help='Calcular también los errores de la proyección para cada M')
        parser.add_argument('--M', type=int, nargs='+', dest='Ms')

    def build_payload(self, options) -> dict:
        return {
            'alphas': options['alphas'],
            'params': options['lam'],
            'ode_source': options['source'],
            'degree': options['degree'],
            'projection': options['projection'],
            'Ms': options['Ms'],
        }
