from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Convergencia en M de la EDO fraccionaria escalar contra la solución de Mittag-Leffler'
    kind = 'ode'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--alpha', type=float, nargs='+', dest='alphas')
        parser.add_argument('--lam', type=float, nargs='+', default=[1.0])
        parser.add_argument('--y0', type=float, default=1.0)
        parser.add_argument('--source', choices=['homogeneous', 'constant'], default='homogeneous')
        parser.add_argument('--M', type=int, nargs='+', dest='Ms')

    def build_payload(self, options) -> dict:
        return {
            'alphas': options['alphas'],
            'params': options['lam'],
            'y0': options['y0'],
            'ode_source': options['source'],
            'Ms': options['Ms'],
        }
