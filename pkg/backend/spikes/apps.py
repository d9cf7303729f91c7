"""Arquivo de configuração do aplicativo"""

from django.apps import AppConfig


class SpikesConfig(AppConfig):
    """Classe de configuração do aplicativo"""

    default_auto_field = "django.db.models.BigAutoField"
    name = "spikes"
    verbose_name = "Análise de Coincidências entre Trens de Spikes"
