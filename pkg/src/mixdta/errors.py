"""Shared exception types."""


class MixDtaError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(MixDtaError):
    """A file could not be parsed under its declared format."""


class ValidationError(MixDtaError):
    """Parsed data violates a structural invariant."""


class ParameterError(MixDtaError):
    """A caller-supplied parameter is out of its admissible range."""


class DataError(MixDtaError):
    """Inconsistent simulation data (e.g. exit before entry)."""


class NoPathError(MixDtaError):
    """Destination unreachable from origin."""


class UnknownIdError(MixDtaError):
    """Unknown link or node id."""


class ConfigError(MixDtaError):
    """Scenario configuration invalid; message names the field."""
