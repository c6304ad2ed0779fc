"""Exception hierarchy.  Each family maps onto one CLI exit code."""


class TwoGuideError(Exception):
    exit_code = 1


class ConfigError(TwoGuideError):
    """Bad or inconsistent configuration (exit code 2)."""

    exit_code = 2


class InputError(ConfigError):
    """Non-finite or otherwise unusable numeric input."""


class NumericError(TwoGuideError):
    """A numerical procedure failed or was asked to do something undefined (exit code 3)."""

    exit_code = 3


class DegenerateSplittingError(NumericError):
    pass


class CalibrationError(NumericError):
    pass


class PreconditionError(NumericError):
    pass


class RegimeError(PreconditionError):
    """Operation requested in the wrong longitudinal regime (propagating vs evanescent)."""


class EmptyPhaseError(NumericError):
    pass


class DomainError(NumericError):
    """Evaluation outside the spatial grid."""


class InvariantError(TwoGuideError):
    """A model invariant does not hold (exit code 4)."""

    exit_code = 4


class ModelViolationError(InvariantError):
    pass
