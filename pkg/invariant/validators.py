"""
Validators for invariant representation settings
"""
import math

from django.core.exceptions import ValidationError


def validate_theta(value):
    """Projection angle must lie in [0, pi)"""
    if not (0.0 <= value < math.pi):
        raise ValidationError(f"Invariant angle must lie in [0, pi), got {value}")
    return value


def validate_wiener_window(value):
    """Window must be odd and at least 3"""
    if value < 3 or value % 2 == 0:
        raise ValidationError(f"Wiener window must be odd and >= 3, got {value}")
    return value


def validate_wiener_noise(value):
    """Noise variance must be None (estimate) or >= 0"""
    if value is not None and not value >= 0.0:
        raise ValidationError(f"Wiener noise variance must be >= 0, got {value}")
    return value


def validate_epsilon_log(value):
    """Log floor must be positive"""
    if not value > 0.0:
        raise ValidationError(f"Log floor must be positive, got {value}")
    return value
