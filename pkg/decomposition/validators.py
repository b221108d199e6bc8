"""
Validators for training settings
"""
from django.core.exceptions import ValidationError

PRIOR_MODES = ('sigmoid', 'shifted')


def validate_positive_int(value, label):
    if int(value) != value or value < 1:
        raise ValidationError(f"{label} must be a positive integer, got {value}")
    return value


def validate_positive(value, label):
    if not value > 0:
        raise ValidationError(f"{label} must be positive, got {value}")
    return value


def validate_fraction(value, label='Pretrain fraction'):
    """Open interval (0, 1)"""
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{label} must lie in (0, 1), got {value}")
    return value


def validate_prior_mode(value):
    if value not in PRIOR_MODES:
        raise ValidationError(f"Prior mode must be one of {', '.join(PRIOR_MODES)}, got '{value}'")
    return value


def validate_non_negative(value, label):
    if not value >= 0:
        raise ValidationError(f"{label} must be >= 0, got {value}")
    return value
