"""Exception types shared by the parsers, the evaluator, and the CLI."""

__all__ = [
    "ShipbenchError",
    "MalformedRecordError",
    "OutOfRangeError",
    "ScoreOutOfRangeError",
    "DuplicateStemError",
    "MissingDimsError",
    "DanglingReferenceError",
    "UnknownImageIdError",
    "UnknownClassError",
    "EmptyManifestError",
    "OverlappingStrataError",
    "EmptySceneError",
]


class ShipbenchError(Exception):
    """Base class for every toolkit-specific failure."""


class MalformedRecordError(ShipbenchError):
    """A record or document could not be parsed (wrong arity, types, structure)."""


class OutOfRangeError(ShipbenchError):
    """A numeric field lies outside its legal range."""


class ScoreOutOfRangeError(OutOfRangeError):
    """A detection confidence is outside [0, 1]."""


class DuplicateStemError(ShipbenchError):
    """Two files in one dataset directory share a stem."""


class MissingDimsError(ShipbenchError):
    """Image dimensions could not be read from an image header."""


class DanglingReferenceError(ShipbenchError):
    """An annotation references an image or category that does not exist."""


class UnknownImageIdError(ShipbenchError):
    """An image id does not exist in the manifest being evaluated."""


class UnknownClassError(ShipbenchError):
    """A class id cannot be resolved against the vocabulary."""


class EmptyManifestError(ShipbenchError):
    """Evaluation was asked to run over a manifest with no images."""


class OverlappingStrataError(ShipbenchError):
    """Two strata claim the same image id."""


class EmptySceneError(ShipbenchError):
    """A collection plan was requested for a scene with no components."""
