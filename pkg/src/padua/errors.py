"""Exception types raised across the package."""


class PaduaError(Exception):
    """Base class for all package errors."""


class ValidationError(PaduaError, ValueError):
    """Invalid arguments or configuration."""


class InsufficientBudget(ValidationError):
    """The query budget cannot support even the smallest model."""


class CoverTooLarge(ValidationError):
    """The requested epsilon-cover exceeds the point cap."""


class DegenerateFeatures(PaduaError):
    """Candidate features do not span the feature space."""


class KernelNonnegative(PaduaError):
    """A kernel without a negative part was passed to decompose()."""


class OracleError(PaduaError):
    """An oracle failed to answer a query."""


class WavFormatError(OracleError):
    """Malformed or unsupported WAV input."""
