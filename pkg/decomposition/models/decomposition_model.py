from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError


@dataclass(eq=False)
class Decomposition:
    """
    One frame split into background b_img, illumination c_img and foreground
    f_img, with the sparse residual s_img = input - b_img and f_img computed
    as s_img - c_img. mask is the binary spatial foreground map.
    """
    frame_id: str
    b_img: np.ndarray
    c_img: np.ndarray
    f_img: np.ndarray
    s_img: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        for name in ('b_img', 'c_img', 'f_img', 's_img'):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(-1))
        self.mask = np.asarray(self.mask, dtype=np.uint8).reshape(-1)
        size = self.b_img.size
        if not (self.c_img.size == self.f_img.size == self.s_img.size == size):
            raise ValidationError(f"Decomposition images of frame {self.frame_id} differ in length")
        if size % self.mask.size:
            raise ValidationError(f"Mask of frame {self.frame_id} does not match the image size")

    def reconstruction(self) -> np.ndarray:
        """b + c + f, equal to the input frame up to rounding"""
        return self.b_img + self.c_img + self.f_img
