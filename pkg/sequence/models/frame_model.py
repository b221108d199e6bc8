from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from django.core.exceptions import ValidationError

from ..validators import validate_frame_dimensions, validate_unit_range, validate_binary


@dataclass(frozen=True, eq=False)
class Frame:
    """
    One vectorized image

    data is the row-major flattening of an (height, width, channels) array,
    so the channels of pixel p sit at data[p * channels:(p + 1) * channels].
    """
    data: np.ndarray
    width: int
    height: int
    channels: int

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64).reshape(-1)
        object.__setattr__(self, 'data', data)
        validate_frame_dimensions(self.width, self.height, self.channels, data.size)
        validate_unit_range(data)

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def as_image(self) -> np.ndarray:
        """(height, width, channels) view of the data"""
        return self.data.reshape(self.height, self.width, self.channels)

    @classmethod
    def from_image(cls, image: np.ndarray) -> 'Frame':
        """Build a frame from an (H, W) or (H, W, C) float array in [0, 1]"""
        if image.ndim == 2:
            image = image[:, :, np.newaxis]
        height, width, channels = image.shape
        return cls(data=image.reshape(-1), width=width, height=height, channels=channels)


@dataclass(eq=False)
class Sequence:
    """
    Temporally ordered frames sharing one shape
    """
    frames: List[Frame]
    frame_ids: List[str]

    def __post_init__(self):
        if not self.frames:
            raise ValidationError("A sequence needs at least one frame")
        if len(self.frames) != len(self.frame_ids):
            raise ValidationError("Each frame needs exactly one id")
        first = self.frames[0]
        for frame_id, frame in zip(self.frame_ids, self.frames):
            if (frame.width, frame.height, frame.channels) != (first.width, first.height, first.channels):
                raise ValidationError(f"Frame {frame_id} differs in shape from frame {self.frame_ids[0]}")

    def __len__(self):
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def channels(self) -> int:
        return self.frames[0].channels

    @property
    def frame_size(self) -> int:
        return self.frames[0].size

    def matrix(self) -> np.ndarray:
        """(n_frames, m) stack of frame vectors"""
        return np.stack([frame.data for frame in self.frames])

    def subset(self, start: int, stop: int) -> 'Sequence':
        return Sequence(frames=self.frames[start:stop], frame_ids=self.frame_ids[start:stop])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, width: int, height: int, channels: int,
                    frame_ids: List[str]) -> 'Sequence':
        frames = [Frame(data=row, width=width, height=height, channels=channels) for row in matrix]
        return cls(frames=frames, frame_ids=list(frame_ids))


@dataclass(eq=False)
class MaskSequence:
    """
    Binary spatial masks (width * height each) paired with a Sequence

    roi, when set, holds one boolean map per frame; pixels outside it are
    excluded from evaluation.
    """
    masks: List[np.ndarray]
    frame_ids: List[str]
    width: int
    height: int
    roi: Optional[List[np.ndarray]] = field(default=None)

    def __post_init__(self):
        if len(self.masks) != len(self.frame_ids):
            raise ValidationError("Each mask needs exactly one id")
        pixels = self.width * self.height
        self.masks = [np.asarray(mask, dtype=np.uint8).reshape(-1) for mask in self.masks]
        for frame_id, mask in zip(self.frame_ids, self.masks):
            if mask.size != pixels:
                raise ValidationError(f"Mask {frame_id} has {mask.size} pixels, expected {pixels}")
            validate_binary(mask)
        if self.roi is not None:
            self.roi = [np.asarray(region, dtype=bool).reshape(-1) for region in self.roi]
            if len(self.roi) != len(self.masks) or any(region.size != pixels for region in self.roi):
                raise ValidationError("ROI maps must match the masks one to one")

    def __len__(self):
        return len(self.masks)

    def roi_for(self, index: int) -> Optional[np.ndarray]:
        return None if self.roi is None else self.roi[index]
