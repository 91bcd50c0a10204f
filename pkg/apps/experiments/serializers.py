import csv
import io
from pathlib import Path

from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from apps.core.models import SolverSettings
from .models import (
    DEFAULT_ALPHAS,
    DEFAULT_MS,
    KINDS,
    ML_METHOD_CHOICES,
    ODE_SOURCES,
    PDE_KINDS,
    REFERENCES,
    ExperimentConfig,
)
from .validators import (
    validate_ascending,
    validate_example51,
    validate_example52,
    validate_example53,
    validate_order,
)


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Valida un documento JSON de experimento y arma un ExperimentConfig.

    Los rangos de cada ejemplo se delegan a validators.py.
    """
    kind = serializers.ChoiceField(choices=KINDS)
    alphas = serializers.ListField(child=serializers.FloatField(), min_length=1, default=lambda: list(DEFAULT_ALPHAS))
    params = serializers.ListField(child=serializers.FloatField(), min_length=1, default=lambda: [1.0])
    Ms = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1, default=lambda: list(DEFAULT_MS))
    theta = serializers.IntegerField(default=0)
    y0 = serializers.FloatField(default=1.0)
    h_exp = serializers.IntegerField(min_value=1, max_value=12, required=False)
    reference = serializers.ChoiceField(choices=REFERENCES, default='numerical')
    reference_m = serializers.IntegerField(min_value=1, required=False)
    ode_source = serializers.ChoiceField(choices=ODE_SOURCES, default='homogeneous')
    t_values = serializers.ListField(child=serializers.FloatField(min_value=0), min_length=1, default=lambda: [1.0])
    ml_method = serializers.ChoiceField(choices=ML_METHOD_CHOICES, default='auto')
    degree = serializers.IntegerField(min_value=64, required=False)
    projection = serializers.BooleanField(default=False)
    include_l2 = serializers.BooleanField(default=False)
    tolerance = serializers.FloatField(min_value=0, default=0.15)
    output = serializers.CharField(required=False, allow_blank=False)

    def _check(self, validator, *args, field: str):
        try:
            validator(*args)
        except DjangoValidationError as exc:
            raise serializers.ValidationError({field: exc.messages})

    def validate(self, attrs):
        cfg = SolverSettings.load()
        attrs.setdefault('h_exp', cfg.reference_h_exp)
        attrs.setdefault('reference_m', cfg.reference_m)
        attrs.setdefault('degree', cfg.max_degree)
        kind = attrs['kind']

        for alpha in attrs['alphas']:
            if kind == 'ml-eval':
                if not (0.0 < alpha <= 1.0):
                    raise serializers.ValidationError({'alphas': f"alpha debe estar en (0, 1], se recibió {alpha}"})
            else:
                self._check(validate_order, alpha, field='alphas')
        self._check(validate_ascending, attrs['Ms'], 'Ms', field='Ms')

        for alpha in attrs['alphas']:
            for param in attrs['params']:
                if kind == 'example51':
                    self._check(validate_example51, alpha, param, field='params')
                elif kind == 'example52':
                    self._check(validate_example52, alpha, param, attrs['theta'], field='params')
                elif kind == 'example53':
                    self._check(validate_example53, alpha, param, field='params')
                elif kind in ('ode', 'besov-report') and param < 0:
                    raise serializers.ValidationError({'params': "lambda debe ser no negativo"})

        if kind in PDE_KINDS and attrs['Ms'][-1] >= attrs['reference_m'] and attrs['reference'] == 'numerical':
            raise serializers.ValidationError({'Ms': "los grados deben ser menores que reference_m"})
        if kind == 'example51' and attrs['reference'] == 'ml-exact':
            raise serializers.ValidationError(
                {'reference': "ml-exact sólo aplica a fuentes independientes del tiempo (example52, example53)"}
            )
        if attrs['degree'] > cfg.max_degree:
            raise serializers.ValidationError({'degree': f"el grado máximo permitido es {cfg.max_degree}"})
        if kind == 'besov-report' and attrs['projection'] and attrs['Ms'][-1] >= attrs['degree']:
            raise serializers.ValidationError({'Ms': "los grados deben ser menores que degree"})
        return attrs

    def create(self, validated_data) -> ExperimentConfig:
        output = validated_data.get('output')
        return ExperimentConfig(
            kind=validated_data['kind'],
            alphas=tuple(validated_data['alphas']),
            params=tuple(validated_data['params']),
            Ms=tuple(validated_data['Ms']),
            theta=validated_data['theta'],
            y0=validated_data['y0'],
            h_exp=validated_data['h_exp'],
            reference=validated_data['reference'],
            reference_m=validated_data['reference_m'],
            ode_source=validated_data['ode_source'],
            t_values=tuple(validated_data['t_values']),
            ml_method=validated_data['ml_method'],
            degree=validated_data['degree'],
            projection=validated_data['projection'],
            include_l2=validated_data['include_l2'],
            tolerance=validated_data['tolerance'],
            output=Path(output) if output else SolverSettings.load().output_dir,
        )


def table_to_csv(header, rows) -> str:
    """CSV genérico para las tablas de diagnóstico; los floats se escriben con repr."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(value)) if isinstance(value, float) else value for value in row])
    return buffer.getvalue()
