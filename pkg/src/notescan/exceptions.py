"""Exception hierarchy shared across the pipeline."""


class NotescanError(Exception):
    """Base class for every error raised by this package."""


class ImageDecodeError(NotescanError, ValueError):
    """The file exists but is not a decodable JPEG or PNG."""


class EmptyMaskError(NotescanError, ValueError):
    """A binary mask has no foreground pixels."""


class OutOfBoundsError(NotescanError, ValueError):
    """A bounding box does not lie inside its image."""


class DegenerateRegionError(NotescanError, ValueError):
    """A region of interest is too small to describe texture."""


class NoValidPairsError(NotescanError, ValueError):
    """An image has no pixel pair at the requested co-occurrence offset."""


class DatasetError(NotescanError, ValueError):
    """Invalid dataset contents (empty, wrong arity, unknown label...)."""


class ParseError(DatasetError):
    """Malformed CSV or ARFF input. ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ModelFormatError(NotescanError, ValueError):
    """A model file is corrupt or was written by an incompatible version."""


class ConfigError(NotescanError, ValueError):
    """Invalid configuration key or value."""
