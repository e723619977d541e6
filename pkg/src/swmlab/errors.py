"""Exception types shared across the package."""


class SwmlabError(Exception):
    """Base class for all package errors."""


class InvalidQueryError(SwmlabError, ValueError):
    """A value query referenced an item outside the oracle's ground set."""


class AxiomViolationError(SwmlabError, ValueError):
    """A constructed oracle violates normalization, monotonicity or submodularity.

    Carries a ``witness`` attribute describing the first violation found.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeGuardError(SwmlabError, ValueError):
    """An exhaustive operation was requested on an instance too large for it."""


class InstanceFormatError(SwmlabError, ValueError):
    """An instance file failed to parse or validate."""
