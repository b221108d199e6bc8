"""
Common error types for the detection pipeline
Shared across all apps in the project
"""
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)


class NumodError(Exception):
    """
    Base class for runtime failures raised by pipeline modules

    Usage problems (bad flags, invalid config values) are reported with
    django.core.exceptions.ValidationError instead.
    """

    error_code = 'NUMOD_ERROR'

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        if error_code:
            self.error_code = error_code
        self.details = details or {}

    def as_dict(self) -> Dict[str, Any]:
        """
        Structured form used in logs and manifests

        Returns:
            dict: message, error_code and details
        """
        payload = {
            'message': self.message,
            'error_code': self.error_code,
        }
        if self.details:
            payload['details'] = self.details
        return payload


class SequenceLoadError(NumodError):
    """A frame or mask directory could not be read"""
    error_code = 'SEQUENCE_LOAD_ERROR'


class ImageWriteError(NumodError):
    """An output image could not be written"""
    error_code = 'IMAGE_WRITE_ERROR'


class InvariantError(NumodError):
    """Input unsuitable for the invariant representation"""
    error_code = 'INVARIANT_ERROR'


class DimensionMismatchError(NumodError):
    """Array shapes disagree"""
    error_code = 'DIMENSION_MISMATCH'


class TrainingDivergedError(NumodError):
    """The objective became NaN or infinite"""
    error_code = 'TRAINING_DIVERGED'


class CheckpointError(NumodError):
    """A checkpoint is missing, malformed or incompatible"""
    error_code = 'CHECKPOINT_ERROR'


class NoEvaluableFramesError(NumodError):
    """Every frame had an undefined F-measure"""
    error_code = 'NO_EVALUABLE_FRAMES'


class FrameAlignmentError(NumodError):
    """Prediction and ground-truth frame sets differ"""
    error_code = 'FRAME_ALIGNMENT_ERROR'


class SynthConfigError(NumodError):
    """A synthetic sequence configuration cannot be rendered"""
    error_code = 'SYNTH_CONFIG_ERROR'


def check_same_shape(name: str, expected, actual) -> None:
    """
    Raise DimensionMismatchError when two shapes differ

    Args:
        name: What is being compared, used in the message
        expected: Expected shape (tuple or int)
        actual: Actual shape (tuple or int)
    """
    if tuple(_as_shape(expected)) != tuple(_as_shape(actual)):
        raise DimensionMismatchError(
            f"{name}: expected shape {tuple(_as_shape(expected))}, got {tuple(_as_shape(actual))}",
            details={'expected': list(_as_shape(expected)), 'actual': list(_as_shape(actual))}
        )


def _as_shape(value):
    if isinstance(value, int):
        return (value,)
    return tuple(value)
