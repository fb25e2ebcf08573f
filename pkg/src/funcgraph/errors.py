"""Exception types raised across the package."""


class FuncGraphError(Exception):
    """Base class for all package errors."""


class BadIndexError(FuncGraphError, ValueError):
    pass


class NonChordalError(FuncGraphError, ValueError):
    pass


class TooLargeError(FuncGraphError, ValueError):
    pass


class IllegalMoveError(FuncGraphError, ValueError):
    pass


class NotSPDError(FuncGraphError, ValueError):
    """A matrix that must be symmetric positive definite failed Cholesky."""


class DomainError(FuncGraphError, ValueError):
    pass


class DimensionMismatchError(FuncGraphError, ValueError):
    pass


class EmptyTraceError(FuncGraphError, ValueError):
    pass


class TooFewSamplesError(FuncGraphError, ValueError):
    pass


class DegenerateGridError(FuncGraphError, ValueError):
    pass


class AllZeroError(FuncGraphError, ValueError):
    pass


class MissingMetadataError(FuncGraphError, ValueError):
    pass


class BadConfigError(FuncGraphError, ValueError):
    pass
