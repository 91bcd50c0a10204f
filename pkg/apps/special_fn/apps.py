from django.apps import AppConfig


class SpecialFnConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.special_fn'
