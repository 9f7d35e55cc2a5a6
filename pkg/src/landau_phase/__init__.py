"""Charged-particle wave packets in a uniform magnetic field.

Exact two-mode Fock-space dynamics, cycle phases and their flux
decomposition, real-space wave functions, and an independent split-step
grid propagator used to cross-check the analytic results.
"""

from .errors import (
    BoundaryError,
    ConfigError,
    LandauPhaseError,
    NumericalError,
    TruncationError,
    ValidationFailure,
)
from .fock import FockTruncation, OperatorMatrix, PhysicalParams, TwoModeState
from .states import StateSpec, make_state

__version__ = "0.1.0"

__all__ = [
    "BoundaryError",
    "ConfigError",
    "FockTruncation",
    "LandauPhaseError",
    "NumericalError",
    "OperatorMatrix",
    "PhysicalParams",
    "StateSpec",
    "TruncationError",
    "TwoModeState",
    "ValidationFailure",
    "make_state",
]
