"""Finite-statistics key rates and protocol search for decoy-state BB84."""
from .model import (IntensityLevel, ObservationBounds, ProtocolSpec, RateReport, SessionTally,
                    SpsBounds, SystemParams, validate)

__version__ = "0.1.0"

__all__ = [
    "IntensityLevel",
    "ObservationBounds",
    "ProtocolSpec",
    "RateReport",
    "SessionTally",
    "SpsBounds",
    "SystemParams",
    "validate",
    "__version__",
]
