"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class VowelscreenError(Exception):
    """Base class for all package errors."""


class ConfigError(VowelscreenError):
    """Invalid or inconsistent pipeline configuration."""


class DataError(VowelscreenError):
    """A problem with input data (audio, metadata, matrices)."""


class UnreadableFileError(DataError):
    """File missing or not readable as RIFF WAV."""


class UnsupportedFormatError(DataError):
    """Audio format outside the supported mono PCM 16/24-bit, 16/48 kHz set."""


class IdentityParseError(DataError):
    """Recording identity (speaker/vowel/style) not recoverable from name or manifest."""


class MetadataError(DataError):
    """Malformed clinical metadata table."""


class DegenerateFrameError(VowelscreenError):
    """Analysis frame with no energy where energy is required."""


class UnvoicedRecordingError(DataError):
    """No voiced frames found; periodicity-based features are undefined."""
