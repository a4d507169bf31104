"""Exception types shared across the package.

Two families matter to callers (and to the CLI exit-code contract):
validation problems subclass :class:`ValidationError`, numerical
failures subclass :class:`NumericalError`.
"""


class PerispecError(Exception):
    """Base class for every error raised by this package."""

    code = "ERROR"


class ValidationError(PerispecError, ValueError):
    code = "VALIDATION"


class NumericalError(PerispecError, ArithmeticError):
    code = "NUMERICAL"


class InvalidParameter(ValidationError):
    code = "INVALID_PARAMETER"


class PoleError(ValidationError):
    code = "POLE"


class DomainError(ValidationError):
    code = "DOMAIN"


class AliasError(ValidationError):
    code = "ALIAS"


class NonzeroMeanForcing(ValidationError):
    code = "NONZERO_MEAN_FORCING"


class WrongProblemKind(ValidationError):
    code = "WRONG_PROBLEM_KIND"


class FieldFormatError(ValidationError):
    code = "FIELD_FORMAT"


class ConfigError(ValidationError):
    code = "CONFIG"


class NegativityError(ValidationError):
    """A material whose multiplier eigenvalues are not all negative."""

    code = "NEGATIVITY"

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class SingularMode(NumericalError):
    code = "SINGULAR_MODE"


class NonConvergence(NumericalError):
    code = "NON_CONVERGENCE"


class PrecisionLoss(NumericalError):
    code = "PRECISION_LOSS"


class ConsistencyError(NumericalError):
    code = "CONSISTENCY"


class QuadratureFailure(NumericalError):
    code = "QUADRATURE_FAILURE"


class InsufficientData(NumericalError):
    code = "INSUFFICIENT_DATA"
