"""Exception hierarchy shared across the package."""


class PimcError(Exception):
    """Base class for all package errors."""


class ShapeError(PimcError, ValueError):
    """Tensor or array dimensions violate an operation's contract."""


class DomainError(PimcError, ValueError):
    """An argument lies outside the documented domain."""


class FormatError(PimcError):
    """A container file has a bad magic, header, or field value."""


class CorruptionError(FormatError):
    """Header and payload disagree (truncation, length mismatch)."""


class ConfigError(PimcError):
    """Invalid or incomplete run/dataset configuration."""


class NumericalError(PimcError):
    """A non-finite value reached a place that requires finite input."""
