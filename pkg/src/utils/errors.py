"""Exception types shared across the package.

Each error also derives from the closest builtin so callers that only know
``ValueError`` / ``KeyError`` / ``FileNotFoundError`` keep working.
"""


class UmlError(Exception):
    """Base class for every error raised by this package."""


class InputDomainError(UmlError, ValueError):
    """A value lies outside its allowed domain (e.g. a feature outside [0, 1])."""


class DimensionError(UmlError, ValueError):
    """Vector length or model dimension disagrees with what was configured."""


class NodeNotFoundError(UmlError, KeyError):
    """A category node index does not exist in the network."""


class ClassNotFoundError(UmlError, KeyError):
    """A class index is unknown to the registry or no longer active."""


class ConfigError(UmlError, ValueError):
    """Settings, scenario or experiment config failed validation."""


class SnapshotFormatError(UmlError, ValueError):
    """A model file could not be parsed or does not match the snapshot schema."""


class SnapshotVersionError(UmlError, ValueError):
    """A model file was written with an unsupported format version."""


class MissingArtifactError(UmlError, FileNotFoundError):
    """An experiment prerequisite (stream, model, manifest) is missing."""

    def __init__(self, artifact: str, hint: str = "") -> None:
        self.artifact = artifact
        message = f"Missing prerequisite artifact: {artifact}"
        if hint:
            message += f" ({hint})"
        super().__init__(message)


class AssociationConflictError(UmlError, ValueError):
    """A new tracked object would sit inside another object's association radius."""
