"""Exception hierarchy.

Three families matter to callers (and to the CLI exit codes):

* ``ParseError``      malformed input files or flags
* ``DomainError``     mathematically invalid input (not PSD, bad epsilon, ...)
* ``SolverFailure``   the conic solver could not certify an answer
"""


class SmoothDivError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SmoothDivError, ValueError):
    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(SmoothDivError, ValueError):
    pass


class NotHermitian(DomainError):
    pass


class NotPSD(DomainError):
    pass


class TraceViolation(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class BadFactorization(DomainError):
    pass


class SupportViolation(DomainError):
    pass


class BadAlpha(DomainError):
    pass


class ZeroVariance(DomainError):
    pass


class EmptyGrid(DomainError):
    pass


class NonUniformInput(DomainError):
    pass


class EmptyFreeSet(DomainError):
    pass


class TooLarge(DomainError):
    pass


class ModelError(SmoothDivError):
    """Inconsistent conic program (shape mismatch, non-Hermitian LMI, ...)."""


class SolverFailure(SmoothDivError):
    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)


class InfeasibleSmoothing(SolverFailure):
    pass


class AllRestartsFailed(SolverFailure):
    pass
