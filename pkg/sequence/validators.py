"""
Validators for frame and mask data
"""
import numpy as np
from django.core.exceptions import ValidationError


def validate_frame_dimensions(width, height, channels, length):
    """
    Check a vectorized frame's declared dimensions

    Raises ValidationError unless width, height >= 1, channels is 1 or 3
    and length == width * height * channels.
    """
    if width < 1 or height < 1:
        raise ValidationError(f"Frame dimensions must be positive, got {width}x{height}")
    if channels not in (1, 3):
        raise ValidationError(f"Frames have 1 or 3 channels, got {channels}")
    if length != width * height * channels:
        raise ValidationError(
            f"Vector length {length} does not match {width}x{height}x{channels}"
        )


def validate_unit_range(data, label='Frame'):
    """Every element must lie in [0, 1]"""
    if data.size and (not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0):
        raise ValidationError(f"{label} values must lie in [0, 1]")


def validate_binary(data, label='Mask'):
    """Mask values must be 0 or 1"""
    if data.size and not np.all((data == 0) | (data == 1)):
        raise ValidationError(f"{label} values must be 0 or 1")
