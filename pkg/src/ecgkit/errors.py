"""Exception hierarchy shared by every ecgkit module.

All errors derive from :class:`EcgToolkitError` and from ``ValueError`` so
callers that only care about "bad input" can catch the builtin.
"""


class EcgToolkitError(ValueError):
    """Base class for toolkit errors."""


class EmptyInputError(EcgToolkitError):
    """An operation received no samples (or too few to do anything)."""


class InsufficientDataError(EcgToolkitError):
    """Not enough values (intervals, beats, periods) for a statistic."""


class SignalRangeError(EcgToolkitError):
    """A time, index or frequency argument lies outside its valid interval."""


class DesignError(EcgToolkitError):
    """Filter or window design parameters are invalid."""


class ConfigurationError(EcgToolkitError):
    """Inconsistent pipeline configuration (e.g. sample-rate mismatch)."""


class UnsupportedSizeError(EcgToolkitError):
    """Transform length is not a power of two."""


class DegenerateFundamentalError(EcgToolkitError):
    """The fundamental component is too small to normalise harmonics by."""


class IngestError(EcgToolkitError):
    """Base class for problems found while reading a record file."""


class HeaderError(IngestError):
    """A WFDB header line is missing or malformed."""


class UnsupportedFormatError(IngestError):
    """The record uses a storage format other than 212."""


class CorruptRecordError(IngestError):
    """The signal file is shorter than the header promises."""


class ParseError(IngestError):
    """A text row could not be parsed as numbers."""


class ValidationError(IngestError):
    """Parsed values are not finite."""
