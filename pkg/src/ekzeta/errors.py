"""Exception hierarchy shared by all modules.

CLI exit codes: validation failures exit 2, general-position failures 3,
precision failures 4, exhausted searches 5.
"""


class EkzetaError(Exception):
    exit_code = 1


class ValidationError(EkzetaError):
    exit_code = 2


class UnsupportedFieldError(ValidationError):
    pass


class NotASublatticeError(ValidationError):
    pass


class SingularMatrixError(ValidationError):
    pass


class ImproperSubspaceError(ValidationError):
    pass


class OutOfConvergenceRangeError(ValidationError):
    pass


class SingularPointError(ValidationError):
    """Evaluation point too close to a lattice point or hyperplane."""


class GeneralPositionError(EkzetaError):
    exit_code = 3


class PrecisionError(EkzetaError):
    exit_code = 4


class RootSeparationError(PrecisionError):
    pass


class SearchExhaustedError(EkzetaError):
    exit_code = 5
