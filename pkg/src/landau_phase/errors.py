"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the dispatcher can
translate exceptions without a lookup table.
"""


class LandauPhaseError(Exception):
    exit_code = 3


class ConfigError(LandauPhaseError, ValueError):
    exit_code = 2


class DimensionError(LandauPhaseError, ValueError):
    exit_code = 2


class NumericalError(LandauPhaseError):
    exit_code = 3


class TruncationError(NumericalError):
    """The truncated Fock basis cannot represent the requested state."""


class BoundaryError(NumericalError):
    """A grid field has non-negligible density at the grid edge."""


class NormalizationError(NumericalError):
    pass


class ValidationFailure(LandauPhaseError):
    exit_code = 1
