from dataclasses import dataclass
from typing import Optional

from django.core.exceptions import ValidationError


@dataclass(frozen=True)
class FrameScore:
    """
    Confusion counts of one frame over its evaluated pixels

    A frame with no positive pixels in either mask has no F-measure and is
    left out of sequence averages. Otherwise an undefined precision or
    recall counts as 0.
    """
    frame_id: str
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValidationError(f"Confusion counts of frame {self.frame_id} must be >= 0")

    @property
    def evaluated(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def defined(self) -> bool:
        return self.tp + self.fp + self.fn > 0

    @property
    def precision(self) -> Optional[float]:
        predicted = self.tp + self.fp
        return self.tp / predicted if predicted else None

    @property
    def recall(self) -> Optional[float]:
        actual = self.tp + self.fn
        return self.tp / actual if actual else None

    @property
    def f_measure(self) -> Optional[float]:
        if not self.defined:
            return None
        precision = self.precision or 0.0
        recall = self.recall or 0.0
        if precision + recall == 0.0:
            return 0.0
        return 2.0 * precision * recall / (precision + recall)
