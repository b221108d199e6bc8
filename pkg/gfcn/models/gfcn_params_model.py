from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from common.utils import array_checksum

PARAM_NAMES = ('w1', 'b1', 'w2', 'b2', 'w3', 'b3')
WEIGHT_NAMES = ('w1', 'w2', 'w3')


@dataclass(eq=False)
class GfcnParams:
    """
    Weights and biases of one generative fully connected network

    latent (d) -> hidden[0] -> hidden[1] -> output (m); w1 is hidden[0] x d,
    w2 is hidden[1] x hidden[0], w3 is m x hidden[1].
    """
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        for name in PARAM_NAMES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h1, d = self.w1.shape
        h2 = self.w2.shape[0]
        m = self.w3.shape[0]
        expected = {
            'b1': (h1,), 'w2': (h2, h1), 'b2': (h2,), 'w3': (m, h2), 'b3': (m,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValidationError(
                    f"GFCN parameter {name} has shape {getattr(self, name).shape}, expected {shape}"
                )
        if not all(np.all(np.isfinite(array)) for array in self.arrays()):
            raise ValidationError("GFCN parameters must be finite")

    @property
    def latent_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_sizes(self) -> Tuple[int, int]:
        return self.w1.shape[0], self.w2.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w3.shape[0]

    @property
    def size(self) -> int:
        return sum(array.size for array in self.arrays())

    def arrays(self) -> List[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def weights(self) -> List[np.ndarray]:
        """Weight matrices only; biases are not regularized"""
        return [getattr(self, name) for name in WEIGHT_NAMES]

    def flatten(self) -> np.ndarray:
        return np.concatenate([array.reshape(-1) for array in self.arrays()])

    @classmethod
    def shapes(cls, latent_dim: int, hidden_sizes: Tuple[int, int], output_dim: int):
        h1, h2 = hidden_sizes
        return {
            'w1': (h1, latent_dim), 'b1': (h1,),
            'w2': (h2, h1), 'b2': (h2,),
            'w3': (output_dim, h2), 'b3': (output_dim,),
        }

    @classmethod
    def from_flat(cls, flat: np.ndarray, latent_dim: int, hidden_sizes: Tuple[int, int],
                  output_dim: int) -> 'GfcnParams':
        flat = np.asarray(flat, dtype=np.float64)
        shapes = cls.shapes(latent_dim, hidden_sizes, output_dim)
        total = sum(int(np.prod(shape)) for shape in shapes.values())
        if flat.size != total:
            raise ValidationError(f"Flat GFCN vector has {flat.size} values, expected {total}")
        arrays, offset = {}, 0
        for name in PARAM_NAMES:
            count = int(np.prod(shapes[name]))
            arrays[name] = flat[offset:offset + count].reshape(shapes[name]).copy()
            offset += count
        return cls(**arrays)

    def unflatten_like(self, flat: np.ndarray) -> 'GfcnParams':
        return GfcnParams.from_flat(flat, self.latent_dim, self.hidden_sizes, self.output_dim)

    def copy(self) -> 'GfcnParams':
        return GfcnParams(**{name: getattr(self, name).copy() for name in PARAM_NAMES})

    def checksum(self) -> str:
        return array_checksum(*self.arrays())


@dataclass(eq=False)
class ForwardCache:
    """
    Activations kept by gfcn_forward for gfcn_backward; all arrays are 2D
    (batch first) even for a single latent vector
    """
    u: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    z2: np.ndarray
    h2: np.ndarray
    z3: np.ndarray
    output: np.ndarray
    single: bool = False
