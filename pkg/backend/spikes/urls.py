"""Módulo de URLs do Django Rest Framework"""

from django.urls import path

from .views import GaueTestView, MultiPatternView, SimulateView, UeTestView

urlpatterns = [
    path("gaue_test/", GaueTestView.as_view(), name="gaue_test"),
    path("ue_test/", UeTestView.as_view(), name="ue_test"),
    path("multi_pattern/", MultiPatternView.as_view(), name="multi_pattern"),
    path("simulate/", SimulateView.as_view(), name="simulate"),
]
