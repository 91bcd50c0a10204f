"""
Django settings for the fracdiff project.

El proyecto no sirve HTTP ni usa base de datos: Django aporta la configuración,
los comandos de gestión (CLI) y el runner de tests. Todos los parámetros
numéricos se leen del entorno (o de un archivo .env en la raíz).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(os.path.join(BASE_DIR, '.env'))

# Solo se usa para firmar cosas internas de Django; no hay sesiones ni usuarios.
SECRET_KEY = os.getenv('SECRET_KEY', 'fracdiff-local-development-key')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',

    # ... apps del proyecto ...
    'apps.core',
    'apps.special_fn',
    'apps.jacobi',
    'apps.frac_ode',
    'apps.fem1d',
    'apps.spacetime',
    'apps.norms',
    'apps.experiments',
]

# Sin persistencia: los resultados son archivos planos (CSV / .dat)
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

# ============================================================================
# MITTAG-LEFFLER
# ============================================================================

# Frontera serie -> representación integral
ML_T_SWITCH = float(os.getenv('FRACDIFF_T_SWITCH', '1.0'))
# Tolerancia de truncamiento de la serie: |término| < tol * (1 + |suma|)
ML_SERIES_TOL = float(os.getenv('FRACDIFF_ML_SERIES_TOL', '1e-17'))
ML_MAX_TERMS = int(os.getenv('FRACDIFF_ML_MAX_TERMS', '4000'))
# Refinamiento de paneles de la integral
ML_INTEGRAL_RTOL = float(os.getenv('FRACDIFF_ML_INTEGRAL_RTOL', '1e-12'))

# ============================================================================
# CUADRATURA / BASES DE JACOBI
# ============================================================================

# Nodos extra (M + QUAD_EXTRA_NODES) en proyecciones y lados derechos
QUAD_EXTRA_NODES = int(os.getenv('FRACDIFF_QUAD_EXTRA_NODES', '40'))
MAX_DEGREE = int(os.getenv('FRACDIFF_MAX_DEGREE', '200'))
# Orden máximo aceptado por exact_homogeneous_deriv
K_MAX = int(os.getenv('FRACDIFF_K_MAX', '8'))

# ============================================================================
# EXPERIMENTOS
# ============================================================================

# Solución de referencia: M = 150, h = 2^-10
REFERENCE_M = int(os.getenv('FRACDIFF_REFERENCE_M', '150'))
REFERENCE_H_EXP = int(os.getenv('FRACDIFF_REFERENCE_H_EXP', '10'))
# Errores por debajo de este piso no entran al ajuste de pendientes
ERROR_FLOOR = float(os.getenv('FRACDIFF_ERROR_FLOOR', '1e-11'))
# Las pendientes de los experimentos se ajustan sobre los últimos RATE_FIT_TAIL grados (0 = todos)
RATE_FIT_TAIL = int(os.getenv('FRACDIFF_RATE_FIT_TAIL', '4'))
MAX_WORKERS = int(os.getenv('FRACDIFF_MAX_WORKERS', '4'))
OUTPUT_DIR = Path(os.getenv('FRACDIFF_OUTPUT_DIR', str(BASE_DIR / 'results')))

# ============================================================================
# LOGGING
# ============================================================================

LOG_LEVEL = os.getenv('FRACDIFF_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

REST_FRAMEWORK = {
    # Los serializers solo validan configuraciones; no hay vistas ni autenticación.
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}
