from .image_io_utils import (
    SequenceReader,
    ImageWriter,
    load_sequence,
    load_masks,
    save_image,
    save_sequence,
)

__all__ = [
    'SequenceReader',
    'ImageWriter',
    'load_sequence',
    'load_masks',
    'save_image',
    'save_sequence',
]
