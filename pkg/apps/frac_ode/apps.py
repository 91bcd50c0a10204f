from django.apps import AppConfig


class FracOdeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.frac_ode'
