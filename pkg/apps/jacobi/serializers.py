import csv
import io

from rest_framework import serializers

from apps.core.exceptions import DomainError
from .models import Expansion, JacobiWeight


class ExpansionRowSerializer(serializers.Serializer):
    """Una fila `k,v_k` del volcado diagnóstico de una expansión"""
    k = serializers.IntegerField(min_value=0)
    v_k = serializers.FloatField()


def expansion_to_csv(e: Expansion) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['k', 'v_k'])
    for k, value in enumerate(e.coeffs):
        writer.writerow([k, repr(float(value))])
    return buffer.getvalue()


def expansion_from_csv(text: str, weight: JacobiWeight) -> Expansion:
    """
    Lee un CSV `k,v_k` (filas en cualquier orden, sin huecos).

    Raises:
        DomainError: filas inválidas o índices no contiguos
    """
    rows = list(csv.DictReader(io.StringIO(text)))
    serializer = ExpansionRowSerializer(data=rows, many=True)
    if not serializer.is_valid():
        raise DomainError(f"invalid expansion rows: {serializer.errors}")

    entries = sorted((row['k'], row['v_k']) for row in serializer.validated_data)
    if [k for k, _ in entries] != list(range(len(entries))):
        raise DomainError("expansion indices must be 0..M without gaps or repeats")
    return Expansion(weight, [value for _, value in entries])
