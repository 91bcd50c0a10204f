from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Convergencia en M de los ejemplos espacio-temporales 51, 52 y 53'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--example', choices=['51', '52', '53'], required=True)
        parser.add_argument('--alpha', type=float, nargs='+', dest='alphas')
        parser.add_argument('--param', type=float, nargs='+', dest='params',
                            help='beta para 51, gamma para 52 y 53')
        parser.add_argument('--theta', type=int, default=0)
        parser.add_argument('--M', type=int, nargs='+', dest='Ms')
        parser.add_argument('--h-exp', type=int, dest='h_exp', help='h = 2^-h_exp')
        parser.add_argument('--reference', choices=['numerical', 'ml-exact'], default='numerical')
        parser.add_argument('--reference-m', type=int, dest='reference_m')
        parser.add_argument('--l2', action='store_true', help='Agregar la columna L2L2')

    def build_payload(self, options) -> dict:
        return {
            'kind': f"example{options['example']}",
            'alphas': options['alphas'],
            'params': options['params'],
            'theta': options['theta'],
            'Ms': options['Ms'],
            'h_exp': options['h_exp'],
            'reference': options['reference'],
            'reference_m': options['reference_m'],
            'include_l2': options['l2'],
        }
