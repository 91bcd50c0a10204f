from django.apps import AppConfig


class Fem1dConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.fem1d'
