"""
@brief Módulo com as views dos testes de independência (GAUE, UE e múltiplos padrões).
"""

import logging

from django.conf import settings

from ..independence_tests import gaue_test, multi_pattern_test, ue_test
from ..serializers import (
    GaueTestSerializer,
    MultiPatternReportSerializer,
    MultiPatternSerializer,
    TestOutcomeSerializer,
    UeTestSerializer,
)
from .base import LibraryAPIView

logger = logging.getLogger(__name__)


class GaueTestView(LibraryAPIView):
    """
    Teste GAUE sobre um padrão.

    Exemplo de uso:
    - POST /api/gaue_test/ {"trial_set": {...}, "pattern": [1, 2], "delta": 0.01}
    """

    serializer_class = GaueTestSerializer

    def compute(self, data: dict):
        ts = data["trial_set"]
        logger.info("GAUE em %s com M=%d", data["pattern"].label, ts.M)
        outcome = gaue_test(ts, data["pattern"], data["delta"], data["alpha"])
        return TestOutcomeSerializer(outcome).data


class UeTestView(LibraryAPIView):
    """
    Teste Unitary Events binado sobre um padrão.

    Exemplo de uso:
    - POST /api/ue_test/ {"trial_set": {...}, "pattern": "1,3", "bin_width": 0.02}
    """

    serializer_class = UeTestSerializer

    def compute(self, data: dict):
        ts = data["trial_set"]
        logger.info("UE em %s com M=%d", data["pattern"].label, ts.M)
        outcome = ue_test(
            ts,
            data["pattern"],
            bin_width=data["bin_width"],
            alpha=data["alpha"],
            match=data["match"],
            delta=data["delta"],
        )
        return TestOutcomeSerializer(outcome).data


class MultiPatternView(LibraryAPIView):
    """
    Testa todos os padrões com |𝓛| ≥ 2 e aplica Benjamini-Hochberg.

    Exemplo de uso:
    - POST /api/multi_pattern/ {"trial_set": {...}, "q": 0.05, "method": "ue"}
    """

    serializer_class = MultiPatternSerializer

    def compute(self, data: dict):
        report = multi_pattern_test(
            data["trial_set"],
            delta=data["delta"],
            q=data["q"],
            method=data["method"],
            max_neurons=settings.COINCIDE["MULTI_PATTERN_MAX_NEURONS"],
            bin_width=data["bin_width"],
            match=data["match"],
        )
        return MultiPatternReportSerializer(report).data
