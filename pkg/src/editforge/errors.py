"""Exception hierarchy shared across the toolkit."""


class EditForgeError(Exception):
    """Base class for all editforge errors."""


class FormatError(EditForgeError):
    """Malformed file structure (e.g. broken RIFF header)."""


class UnsupportedFormatError(EditForgeError):
    """Well-formed file using an encoding we do not read."""


class ParameterError(EditForgeError):
    """Argument outside its documented range or schema."""


class EmptyInputError(EditForgeError):
    """Operation requires a non-empty signal."""


class TooShortError(EditForgeError):
    """Audio shorter than one analysis window."""


class ShapeError(EditForgeError):
    """Array dimensions do not match the model/operation."""


class LabelError(EditForgeError):
    """Class label outside the configured label set."""


class NotSynthesizableError(EditForgeError):
    """Edit class is ingested from disk, never generated (original/TTS/VC)."""


class DependencyError(EditForgeError):
    """A required donor buffer, tool, or directory is missing."""


class ExternalProcessError(EditForgeError):
    """External transcoder failed or its binary was not found."""


class EmptyCorpusError(EditForgeError):
    """Corpus scan found no usable audio files."""


class CapacityError(EditForgeError):
    """Not enough source material to satisfy a generation request."""


class ConfigurationError(EditForgeError):
    """Inconsistent run configuration (label sets, degenerate data, ...)."""
