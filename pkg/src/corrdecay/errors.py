class CorrDecayError(Exception):
    """Base class for all library errors."""


class InvalidInputError(CorrDecayError, ValueError):
    pass


class HardConstraintError(CorrDecayError, ValueError):
    """Raised when an operation needs beta, gamma, lambda all positive."""


class TooLargeError(CorrDecayError):
    pass


class UnsupportedRegimeError(CorrDecayError):
    pass


class DomainError(CorrDecayError, ValueError):
    pass


class NonContractiveError(CorrDecayError, ValueError):
    pass


class NumericError(CorrDecayError, ArithmeticError):
    pass


class UncertifiedError(CorrDecayError):
    """The instance lies outside the certified uniqueness region.

    ``failures`` lists ``(vertex, detail)`` pairs for the offending vertices.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
