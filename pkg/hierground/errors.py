"""Exception hierarchy shared by every hierGround sub-package."""

from __future__ import annotations


class GroundingError(Exception):
    """Base exception for hierGround errors."""


class ShapeError(GroundingError, ValueError):
    """Raised when tensor shapes are incompatible for an operation."""


class ConfigurationError(GroundingError, ValueError):
    """Raised when a configuration value is invalid or inconsistent."""


class InputError(GroundingError, ValueError):
    """Raised for invalid caller input (empty sentences, out-of-range ids, empty lists)."""


class ChunkingError(GroundingError, ValueError):
    """Raised when a sentence cannot be decoupled into phrases."""


class GradientError(GroundingError):
    """Raised when backward or an optimizer step cannot proceed."""


class CheckpointError(GroundingError):
    """Raised when a checkpoint cannot be written, read, or applied to a model."""


class SceneGenerationError(GroundingError):
    """Raised when a scene configuration cannot be realised within the retry budget."""


class SceneSemanticsError(GroundingError):
    """Raised when an expression does not denote exactly one object in its scene."""


class TrainingDivergedError(GroundingError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, message: str, checkpoint_path: str | None = None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path
