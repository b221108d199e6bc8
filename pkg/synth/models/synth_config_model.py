from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from django.core.exceptions import ValidationError

BACKGROUNDS = ('flat', 'gradient', 'texture')
EVENT_KINDS = ('global_gain', 'half_frame_gain', 'soft_shadow')


@dataclass(frozen=True)
class SynthObject:
    """
    Solid rectangle moving along a straight line

    Top-left corner at frame t is floor(start + velocity * (t - first_frame)).
    The object is drawn on frames first_frame..last_frame inclusive
    (last_frame=None means until the end).
    """
    size: Tuple[int, int] = (8, 8)
    color: Tuple[float, float, float] = (0.9, 0.15, 0.1)
    start: Tuple[float, float] = (0.0, 0.0)
    velocity: Tuple[float, float] = (0.0, 0.0)
    first_frame: int = 0
    last_frame: Optional[int] = None

    def __post_init__(self):
        if min(self.size) < 1:
            raise ValidationError(f"Object size must be positive, got {self.size}")
        if len(self.color) != 3 or any(not 0.0 <= v <= 1.0 for v in self.color):
            raise ValidationError(f"Object color must be three values in [0, 1], got {self.color}")
        if self.first_frame < 0 or (self.last_frame is not None and self.last_frame < self.first_frame):
            raise ValidationError(f"Object frame range {self.first_frame}..{self.last_frame} is empty")


@dataclass(frozen=True)
class IlluminationEvent:
    """
    Multiplicative illumination change active on frames start..end inclusive

    global_gain scales the whole frame, half_frame_gain the left half.
    The gain ramps linearly from magnitude to magnitude_end when that is
    set; tint multiplies the gain per channel. soft_shadow darkens a
    Gaussian-edged ellipse (centre moving with velocity) by the config's
    shadow factor.
    """
    kind: str = 'global_gain'
    start: int = 0
    end: int = 0
    magnitude: float = 1.0
    magnitude_end: Optional[float] = None
    tint: Optional[Tuple[float, float, float]] = None
    center: Tuple[float, float] = (0.0, 0.0)
    velocity: Tuple[float, float] = (0.0, 0.0)
    radii: Tuple[float, float] = (8.0, 5.0)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"Unknown illumination event '{self.kind}'")
        if self.start < 0 or self.end < self.start:
            raise ValidationError(f"Event frame range {self.start}..{self.end} is empty")
        if not self.magnitude > 0 or (self.magnitude_end is not None and not self.magnitude_end > 0):
            raise ValidationError("Gain magnitudes must be positive")
        if self.tint is not None and (len(self.tint) != 3 or min(self.tint) <= 0):
            raise ValidationError("Tint must be three positive channel gains")
        if min(self.radii) <= 0:
            raise ValidationError("Shadow radii must be positive")

    def gain_at(self, frame: int) -> float:
        if self.magnitude_end is None or self.end == self.start:
            return self.magnitude
        progress = (frame - self.start) / (self.end - self.start)
        return self.magnitude + (self.magnitude_end - self.magnitude) * progress

    def active(self, frame: int) -> bool:
        return self.start <= frame <= self.end


@dataclass(frozen=True)
class SynthConfig:
    """
    A synthetic scene: static background, moving objects, scripted
    illumination events and sensor noise
    """
    width: int = 64
    height: int = 64
    n_frames: int = 100
    background: str = 'gradient'
    background_seed: int = 0
    objects: List[SynthObject] = field(default_factory=list)
    events: List[IlluminationEvent] = field(default_factory=list)
    shadow_factor: float = 0.5
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.n_frames < 1:
            raise ValidationError("Width, height and frame count must be positive")
        if self.background not in BACKGROUNDS:
            raise ValidationError(f"Background must be one of {', '.join(BACKGROUNDS)}")
        if not 0.0 < self.shadow_factor < 1.0:
            raise ValidationError(f"Shadow factor must lie in (0, 1), got {self.shadow_factor}")
        if not self.noise_std >= 0.0:
            raise ValidationError("Noise std must be >= 0")
        object.__setattr__(self, 'objects', list(self.objects))
        object.__setattr__(self, 'events', list(self.events))
