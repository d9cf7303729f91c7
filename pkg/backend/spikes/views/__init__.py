"""This module initializes the views for the application."""

from .independence import GaueTestView, MultiPatternView, UeTestView
from .simulation import SimulateView

__all__ = [
    "GaueTestView",
    "UeTestView",
    "MultiPatternView",
    "SimulateView",
]
