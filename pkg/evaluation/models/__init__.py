from .frame_score_model import FrameScore

__all__ = [
    'FrameScore'
]
