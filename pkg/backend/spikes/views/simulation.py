"""Módulo de views da simulação dos frameworks"""

import logging

from django.conf import settings

from ..serializers import SimulateSerializer, SimulationSerializer
from ..simulate import FrameworkConfig, draw_seed, sample_framework
from .base import LibraryAPIView

logger = logging.getLogger(__name__)


class SimulateView(LibraryAPIView):
    """
    Gera M trials de um framework.

    Sem `seed` no corpo, uma semente é sorteada e devolvida em `parameters.seed`.
    """

    serializer_class = SimulateSerializer

    def compute(self, data: dict):
        seed = data["seed"] if data["seed"] is not None else draw_seed()
        cfg = FrameworkConfig(
            framework=data["framework"],
            M=data["M"],
            seed=seed,
            event_cap=settings.COINCIDE["HAWKES_EVENT_CAP"],
        )
        logger.info("Simulando %s com M=%d e semente %d", cfg.framework.value, cfg.M, seed)
        return SimulationSerializer(sample_framework(cfg)).data
