from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError


@dataclass(frozen=True)
class ThresholdState:
    """
    Running count / mean / sum of squared deviations over every foreground
    value seen so far
    """
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def __post_init__(self):
        if self.count < 0:
            raise ValidationError("Threshold state count must be >= 0")
        if not self.m2 >= 0.0:
            raise ValidationError("Threshold state M2 must be >= 0")

    def merge(self, values: np.ndarray) -> 'ThresholdState':
        """Pairwise (Chan) merge of a batch of values into the running moments"""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            return self
        batch_count = values.size
        batch_mean = float(values.mean())
        batch_m2 = float(np.sum((values - batch_mean) ** 2))
        total = self.count + batch_count
        delta = batch_mean - self.mean
        return ThresholdState(
            count=total,
            mean=self.mean + delta * batch_count / total,
            m2=self.m2 + batch_m2 + delta * delta * self.count * batch_count / total,
        )

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))

    def to_dict(self) -> dict:
        return {'count': self.count, 'mean': self.mean, 'm2': self.m2}
