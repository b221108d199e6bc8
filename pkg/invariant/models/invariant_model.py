import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError

from sequence.validators import validate_unit_range
from ..validators import (
    validate_theta,
    validate_wiener_window,
    validate_wiener_noise,
    validate_epsilon_log,
)


@dataclass(frozen=True)
class InvariantModel:
    """
    Settings that define the invariant transform

    theta is the angle of the illumination direction e in the
    (log(R/G), log(B/G)) plane; projections use the unit vector at
    theta + pi/2. wiener_noise=None means "estimate per frame as the median
    of the local variances".
    """
    theta: float = 0.0
    wiener_window: int = 7
    wiener_noise: Optional[float] = None
    epsilon_log: float = 1e-4

    def __post_init__(self):
        validate_theta(self.theta)
        validate_wiener_window(self.wiener_window)
        validate_wiener_noise(self.wiener_noise)
        validate_epsilon_log(self.epsilon_log)

    @property
    def direction(self) -> np.ndarray:
        """Unit vector e"""
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    @property
    def projection_axis(self) -> np.ndarray:
        """Unit vector orthogonal to e"""
        return np.array([-math.sin(self.theta), math.cos(self.theta)])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'InvariantModel':
        return cls(
            theta=float(data['theta']),
            wiener_window=int(data['wiener_window']),
            wiener_noise=None if data.get('wiener_noise') is None else float(data['wiener_noise']),
            epsilon_log=float(data['epsilon_log']),
        )


@dataclass(frozen=True, eq=False)
class InvariantFrame:
    """
    Single-channel invariant image, values in [0, 1]
    """
    data: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64).reshape(-1)
        object.__setattr__(self, 'data', data)
        if data.size != self.width * self.height:
            raise ValidationError(
                f"Invariant image has {data.size} values, expected {self.width}x{self.height}"
            )
        validate_unit_range(data, label='Invariant image')

    def as_image(self) -> np.ndarray:
        return self.data.reshape(self.height, self.width)
