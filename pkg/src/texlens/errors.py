"""Exception taxonomy shared by every module.

The CLI maps these onto distinct exit codes, so new error conditions should
reuse one of the classes below rather than raising bare ValueError.
"""


class TexlensError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(TexlensError):
    """An operation was called with arguments that violate its contract."""


class FormatError(TexlensError):
    """A byte stream does not conform to the tensor file format header."""


class CorruptionError(TexlensError):
    """A recognized tensor file is structurally damaged (truncated payload,
    extent product overflow)."""


class ValidationError(TexlensError):
    """Data parsed fine but violates a value-level invariant (NaN/Inf,
    impossible shapes)."""


class SchemaError(TexlensError):
    """A manifest document violates the manifest schema."""


class ConfigError(TexlensError):
    """A configuration value is out of contract (weights, specs)."""


class DegenerateInputError(TexlensError):
    """An input is mathematically degenerate for the requested statistic
    (e.g. a constant vector cannot be z-normalized)."""
