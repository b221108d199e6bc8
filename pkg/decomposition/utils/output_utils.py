"""
Writes decomposition results in the run output layout:
background/, illumination/, foreground/, masks/, invariant/
"""
import logging
from pathlib import Path
from typing import List

import numpy as np

from invariant.models import InvariantFrame
from sequence.utils import save_sequence
from ..models import Decomposition

logger = logging.getLogger(__name__)


def write_decompositions(
    output,
    decompositions: List[Decomposition],
    invariant_frames: List[InvariantFrame],
    width: int,
    height: int,
    channels: int
) -> None:
    """B unsigned, C and F with the signed encoding, masks as 0/255"""
    output = Path(output)
    ids = [d.frame_id for d in decompositions]
    save_sequence(np.stack([d.b_img for d in decompositions]), ids, width, height, channels,
                  output / 'background')
    save_sequence(np.stack([d.c_img for d in decompositions]), ids, width, height, channels,
                  output / 'illumination', signed=True)
    save_sequence(np.stack([d.f_img for d in decompositions]), ids, width, height, channels,
                  output / 'foreground', signed=True)
    save_sequence(np.stack([d.mask for d in decompositions]).astype(np.float64), ids, width, height, 1,
                  output / 'masks')
    save_sequence(np.stack([frame.data for frame in invariant_frames]), ids, width, height, 1,
                  output / 'invariant')
    logger.info(f"Wrote {len(ids)} decomposed frames to {output}")
