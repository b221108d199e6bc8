from .frame_model import Frame, Sequence, MaskSequence

__all__ = [
    'Frame',
    'Sequence',
    'MaskSequence'
]
