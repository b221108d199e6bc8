from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError


@dataclass(frozen=True, eq=False)
class PriorMap:
    """
    Single-channel per-pixel weight steering the residual split

    With the default sigmoid prior every value lies in [0.5, 1); the shifted
    prior lies in [0, 1).
    """
    m_values: np.ndarray
    sigma: float

    def __post_init__(self):
        values = np.asarray(self.m_values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, 'm_values', values)
        if not self.sigma >= 0.0:
            raise ValidationError(f"Prior sigma must be >= 0, got {self.sigma}")
        if values.size and (not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0):
            raise ValidationError("Prior map values must lie in [0, 1]")

    def broadcast(self, channels: int) -> np.ndarray:
        """Repeat each pixel's weight over its channels (pixel-major layout)"""
        return np.repeat(self.m_values, channels)
