from django.apps import AppConfig


class JacobiConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.jacobi'
