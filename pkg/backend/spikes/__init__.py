"""Detecção de dependência entre trens de spikes pela contagem de coincidências com atraso."""

__version__ = "0.1.0"
