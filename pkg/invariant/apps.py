from django.apps import AppConfig


class InvariantConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'invariant'
