"""
Foreground thresholding

A pixel is foreground when the largest absolute foreground value over its
channels reaches factor * t, where t is the population standard deviation
of every foreground value (floored at 1e-6). Given a prior map, pixels
it assigns to illumination (M < 1/2) enter the statistics as zeros.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from common.utils import check_same_shape
from ..models import ThresholdState

logger = logging.getLogger(__name__)

T_FLOOR = 1e-6
MODES = ('batch', 'online')
ILLUMINATION_SPLIT = 0.5


def foreground_masks(f_images: np.ndarray, channels: int, threshold: float) -> np.ndarray:
    """(n, pixels) uint8 masks: max over channels of |F| >= threshold"""
    f_images = np.atleast_2d(np.asarray(f_images, dtype=np.float64))
    n = f_images.shape[0]
    magnitude = np.abs(f_images).reshape(n, -1, channels).max(axis=2)
    return (magnitude >= threshold).astype(np.uint8)


def threshold_foreground(
    f_images: np.ndarray,
    channels: int = 1,
    mode: str = 'batch',
    state: Optional[ThresholdState] = None,
    factor: float = 2.0,
    prior: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, float, ThresholdState]:
    """
    Binary foreground masks

    Args:
        f_images: Foreground images, one row per frame
        channels: Channels per pixel
        mode: 'batch' uses these images only; 'online' merges them into
            state and uses the running statistics
        state: Running statistics carried between online streams
        factor: Threshold multiplier
        prior: Prior map per frame, one value per pixel; its illumination
            pixels do not add their foreground values to the statistics

    Returns:
        (masks, t, state): t is the floored standard deviation, before the
        factor; state is the updated running statistics
    """
    if mode not in MODES:
        raise ValueError(f"Unknown threshold mode '{mode}'")
    f_images = np.atleast_2d(np.asarray(f_images, dtype=np.float64))
    state = state or ThresholdState()
    statistics = f_images
    if prior is not None:
        foreground_share = np.repeat(np.atleast_2d(np.asarray(prior)) >= ILLUMINATION_SPLIT, channels, axis=1)
        check_same_shape('prior map', f_images.shape, foreground_share.shape)
        statistics = f_images * foreground_share
    merged = state.merge(statistics)
    if mode == 'batch':
        t = max(float(np.std(statistics)), T_FLOOR)
    else:
        t = max(merged.std, T_FLOOR)
    masks = foreground_masks(f_images, channels, factor * t)
    logger.debug(f"Thresholded {f_images.shape[0]} frames ({mode}): t={t:.6g}, "
                 f"{int(masks.sum())} foreground pixels")
    return masks, t, merged
