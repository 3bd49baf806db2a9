"""Exception hierarchy shared by every module."""


class EpsMyersError(Exception):
    """Base class for all package errors."""


class DomainError(EpsMyersError, ValueError):
    """An input lies outside the domain of a formula."""

    def __init__(self, message, clause=None):
        super().__init__(message)
        self.clause = clause


class PreconditionError(DomainError):
    """A theorem hypothesis required by a threshold or check does not hold."""

    def __init__(self, message, clause=None, witness=None):
        super().__init__(message, clause)
        self.witness = witness


class UnsupportedError(EpsMyersError, NotImplementedError):
    """The requested model feature is outside the supported closed-form family."""


class NumericError(EpsMyersError, ArithmeticError):
    """A numerical procedure failed to converge or produced a non-finite value."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
