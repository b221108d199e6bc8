from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError


@dataclass(eq=False)
class AdamState:
    """
    Moment estimates for one flat parameter vector
    """
    step_count: int
    first_moment: np.ndarray
    second_moment: np.ndarray
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        self.first_moment = np.asarray(self.first_moment, dtype=np.float64)
        self.second_moment = np.asarray(self.second_moment, dtype=np.float64)
        if self.first_moment.shape != self.second_moment.shape:
            raise ValidationError("Adam moment vectors must have the same length")
        if self.step_count < 0:
            raise ValidationError("Adam step count must be >= 0")
        if not self.lr > 0:
            raise ValidationError("Adam learning rate must be positive")
        if np.any(self.second_moment < 0):
            raise ValidationError("Adam second moment must be non-negative")

    @property
    def size(self) -> int:
        return self.first_moment.size

    @classmethod
    def fresh(cls, size: int, lr: float = 0.001) -> 'AdamState':
        return cls(step_count=0, first_moment=np.zeros(size), second_moment=np.zeros(size), lr=lr)
