from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from django.core.exceptions import ValidationError


@dataclass(eq=False)
class FrameVariables:
    """
    Per-frame optimizable variables: Net1 latent u1, Net2 latent u2 and the
    illumination change image c
    """
    u1: np.ndarray
    u2: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=np.float64).reshape(-1)
        self.u2 = np.asarray(self.u2, dtype=np.float64).reshape(-1)
        self.c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        if self.u1.size != self.u2.size:
            raise ValidationError(
                f"Latent codes differ in length: u1 has {self.u1.size}, u2 has {self.u2.size}"
            )
        if not (np.all(np.isfinite(self.u1)) and np.all(np.isfinite(self.u2)) and np.all(np.isfinite(self.c))):
            raise ValidationError("Frame variables must be finite")

    @property
    def latent_dim(self) -> int:
        return self.u1.size

    @staticmethod
    def from_rows(u1: np.ndarray, u2: np.ndarray, c: np.ndarray) -> List['FrameVariables']:
        """One FrameVariables per row of the stacked matrices"""
        return [FrameVariables(u1=a.copy(), u2=b.copy(), c=x.copy()) for a, b, x in zip(u1, u2, c)]

    @staticmethod
    def stack(variables: List['FrameVariables']) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.stack([v.u1 for v in variables]),
            np.stack([v.u2 for v in variables]),
            np.stack([v.c for v in variables]),
        )
