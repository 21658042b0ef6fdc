"""Adiabatic theory of resonant three-wave mixing in three-level media."""

from .errors import *  # noqa: F401,F403
from .model import BackgroundTransition, BoundaryFields, MediumParams, rabi, residual_mismatch, validate

__version__ = "0.1.0"

__all__ = [
    "BackgroundTransition",
    "BoundaryFields",
    "MediumParams",
    "rabi",
    "residual_mismatch",
    "validate",
]
