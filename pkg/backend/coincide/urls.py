"""
Configuração de URLs do projeto coincide.

A única superfície HTTP é a API de testes de independência, montada em ``/api/``.
"""

from django.urls import include, path

urlpatterns = [
    path("api/", include("spikes.urls")),
]
