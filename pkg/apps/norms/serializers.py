import csv
import io
from typing import Iterable

from rest_framework import serializers

from apps.core.exceptions import DomainError
from .models import NORM_NAMES, ErrorReport

DIAGNOSTIC_NAMES = ('decay', 'weighted_l2', 'seminorm')

SUMMARY_COLUMNS = ['alpha', 'param', 'norm', 'slope', 'predicted', 'tolerance', 'ok']


def _number(value) -> str:
    return repr(float(value))


class ErrorRowSerializer(serializers.Serializer):
    """Una fila `M,h,alpha,param,E1,E2[,L2L2]` del CSV de errores"""
    M = serializers.IntegerField(min_value=0)
    h = serializers.FloatField(min_value=0)
    alpha = serializers.FloatField(min_value=0, max_value=1)
    param = serializers.FloatField()
    E1 = serializers.FloatField(min_value=0)
    E2 = serializers.FloatField(min_value=0)
    L2L2 = serializers.FloatField(min_value=0, required=False)


class SummaryRowSerializer(serializers.Serializer):
    alpha = serializers.FloatField()
    param = serializers.FloatField()
    norm = serializers.ChoiceField(choices=[*NORM_NAMES, *DIAGNOSTIC_NAMES])
    slope = serializers.FloatField()
    predicted = serializers.FloatField()
    tolerance = serializers.FloatField(min_value=0)
    ok = serializers.BooleanField()


def report_to_csv(report: ErrorReport) -> str:
    """CSV determinista: floats con repr, filas en el orden de Ms."""
    header = ['M', 'h', 'alpha', 'param', *report.columns]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for M, errors in report.rows():
        writer.writerow([M, _number(report.h), _number(report.alpha), _number(report.param)]
                        + [_number(errors[name]) for name in report.columns])
    return buffer.getvalue()


def report_from_csv(text: str) -> ErrorReport:
    """
    Lee un CSV de errores de un único par (alpha, param).

    Raises:
        DomainError: filas inválidas o mezcla de corridas
    """
    rows = list(csv.DictReader(io.StringIO(text)))
    serializer = ErrorRowSerializer(data=rows, many=True)
    if not serializer.is_valid():
        raise DomainError(f"invalid error rows: {serializer.errors}")
    data = serializer.validated_data
    if not data:
        raise DomainError("the error CSV holds no rows")
    first = data[0]
    if any((row['h'], row['alpha'], row['param']) != (first['h'], first['alpha'], first['param']) for row in data):
        raise DomainError("an error CSV must hold a single (h, alpha, param) run")
    has_l2 = all('L2L2' in row for row in data)
    return ErrorReport(
        alpha=first['alpha'],
        param=first['param'],
        h=first['h'],
        Ms=tuple(row['M'] for row in data),
        E1=tuple(row['E1'] for row in data),
        E2=tuple(row['E2'] for row in data),
        L2L2=tuple(row['L2L2'] for row in data) if has_l2 else None,
    )


def report_to_dat(report: ErrorReport) -> str:
    """Columnas separadas por espacios para gnuplot, con encabezado comentado."""
    lines = [
        f"# alpha={_number(report.alpha)} param={_number(report.param)} h={_number(report.h)}",
        '# ' + ' '.join(['M', *report.columns]),
    ]
    for name, fit in sorted(report.fits.items()):
        lines.append(f"# fit {name}: slope={fit.slope:.6f} intercept={fit.intercept:.6f} residual={fit.residual:.3e}")
    for M, errors in report.rows():
        lines.append(' '.join([str(M)] + [f"{errors[name]:.16e}" for name in report.columns]))
    return '\n'.join(lines) + '\n'


def summary_to_csv(rows: Iterable[dict]) -> str:
    rows = list(rows)
    serializer = SummaryRowSerializer(data=rows, many=True)
    if not serializer.is_valid():
        raise DomainError(f"invalid summary rows: {serializer.errors}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(SUMMARY_COLUMNS)
    for row in serializer.validated_data:
        writer.writerow([
            _number(row['alpha']), _number(row['param']), row['norm'],
            f"{row['slope']:.6f}", f"{row['predicted']:.6f}", _number(row['tolerance']),
            'true' if row['ok'] else 'false',
        ])
    return buffer.getvalue()
