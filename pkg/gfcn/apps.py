from django.apps import AppConfig


class GfcnConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gfcn'
