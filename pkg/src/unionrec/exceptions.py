"""Exception types shared across the package."""


class UnionRecError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficientError(UnionRecError):
    """A matrix that must have full column rank does not."""


class DomainError(UnionRecError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DimensionMismatchError(UnionRecError, ValueError):
    """Array shapes are inconsistent with each other."""


class SizeError(UnionRecError, ValueError):
    """A requested enumeration or allocation exceeds the configured cap."""


class NoCandidateError(UnionRecError, ValueError):
    """No candidate subspace satisfies the requested overlap condition."""


class ConfigError(UnionRecError, ValueError):
    """An experiment or CLI configuration is invalid.

    Carries the offending field name so command-line diagnostics can point
    at it directly.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
