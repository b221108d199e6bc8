"""
Loss terms of the decomposition objective

  reconst = sum |I - B| + sum |I_inv - B_inv|
  decomp  = sum M |C| + sum (1 - M) |F|,  F = I - B - C
  reg     = lambda (1/2 |W1|^2 + 1/2 |W2|^2), weights only

Arrays are stacked one frame per row. M is single channel and is repeated
over the channels of C and F.
"""

import logging
from typing import Iterable, List, Sequence, Union

import numpy as np
from scipy.special import expit

from common.utils import DimensionMismatchError, check_same_shape
from gfcn.models import GfcnParams
from ..models import PriorMap

logger = logging.getLogger(__name__)

SIGMA_FLOOR = 1e-6
# Shifted prior: M = 1/2 at PRIOR_OFFSET noise levels, slope set by PRIOR_GAIN
PRIOR_OFFSET = 3.0
PRIOR_GAIN = 2.0
# Lowest noise level used as the shifted prior's scale (noise-free images)
NOISE_FLOOR = 0.01


class LossCalculator:
    """
    Prior map and loss terms, plus the prior's derivative used by the
    objective's backward pass
    """

    @staticmethod
    def prior_values(s_inv: np.ndarray, sigma, prior_mode: str = 'sigmoid') -> np.ndarray:
        """
        Prior weights for invariant residuals

        sigmoid: 1 / (1 + exp(-|s_inv - sigma|)), in [0.5, 1)
        shifted: 1 / (1 + exp(-g (|s_inv| / sigma - k))), in (0, 1), where
            sigma is the frame's invariant noise level, k = PRIOR_OFFSET and
            g = PRIOR_GAIN; residuals within k noise levels lean towards C

        sigma broadcasts against s_inv (scalar, or one value per row as an
        (n, 1) column).
        """
        if prior_mode == 'sigmoid':
            return expit(np.abs(s_inv - sigma))
        if prior_mode == 'shifted':
            scaled = np.abs(s_inv) / np.maximum(sigma, SIGMA_FLOOR)
            return expit(PRIOR_GAIN * (scaled - PRIOR_OFFSET))
        raise ValueError(f"Unknown prior mode '{prior_mode}'")

    @staticmethod
    def prior_slope(s_inv: np.ndarray, sigma, prior: np.ndarray, prior_mode: str = 'sigmoid') -> np.ndarray:
        """d prior / d s_inv, with sign(0) = 0 at the kink"""
        if prior_mode == 'sigmoid':
            return prior * (1.0 - prior) * np.sign(s_inv - sigma)
        scale = np.maximum(sigma, SIGMA_FLOOR)
        return PRIOR_GAIN * prior * (1.0 - prior) * np.sign(s_inv) / scale

    @staticmethod
    def channels_of(image_size: int, pixel_count: int) -> int:
        if pixel_count < 1 or image_size % pixel_count:
            raise DimensionMismatchError(
                f"Image length {image_size} is not a whole number of channels over {pixel_count} pixels",
                details={'image_size': image_size, 'pixel_count': pixel_count}
            )
        return image_size // pixel_count

    @staticmethod
    def broadcast_prior(prior: np.ndarray, channels: int) -> np.ndarray:
        """Repeat each pixel's prior over its channels (last axis, pixel-major)"""
        return np.repeat(prior, channels, axis=-1)


def _rows(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        return np.atleast_2d(values.astype(np.float64, copy=False))
    return np.stack([np.asarray(v, dtype=np.float64).reshape(-1) for v in values])


def compute_prior_map(s_inv: np.ndarray, sigma: float, prior_mode: str = 'sigmoid') -> PriorMap:
    """
    Prior map of one frame from its signed invariant residual

    Args:
        s_inv: I_inv - B_inv, one value per pixel
        sigma: Standard deviation of the frame's invariant image pixels
            ('sigmoid'), or its pixel noise level ('shifted')
        prior_mode: 'sigmoid' or 'shifted'

    Returns:
        PriorMap
    """
    s_inv = np.asarray(s_inv, dtype=np.float64).reshape(-1)
    return PriorMap(m_values=LossCalculator.prior_values(s_inv, sigma, prior_mode), sigma=float(sigma))


def loss_reconst(frames, invariant_frames, b_outputs, b_inv_outputs) -> float:
    """Sum of absolute reconstruction errors of both networks over all frames"""
    frames, b_outputs = _rows(frames), _rows(b_outputs)
    invariant_frames, b_inv_outputs = _rows(invariant_frames), _rows(b_inv_outputs)
    check_same_shape('background', frames.shape, b_outputs.shape)
    check_same_shape('invariant background', invariant_frames.shape, b_inv_outputs.shape)
    return float(np.abs(frames - b_outputs).sum() + np.abs(invariant_frames - b_inv_outputs).sum())


def loss_decomp(prior_maps: Union[np.ndarray, Sequence[PriorMap]], c_list, f_list) -> float:
    """
    sum M |C| + sum (1 - M) |F| with M repeated over the image channels

    Args:
        prior_maps: PriorMaps, or an (n, pixels) array of prior values
        c_list: Illumination images, one per frame
        f_list: Foreground images, one per frame
    """
    if not isinstance(prior_maps, np.ndarray):
        prior_maps = [p.m_values if isinstance(p, PriorMap) else p for p in prior_maps]
    prior = _rows(prior_maps)
    c, f = _rows(c_list), _rows(f_list)
    check_same_shape('foreground', c.shape, f.shape)
    if prior.shape[0] != c.shape[0]:
        raise DimensionMismatchError(f"{prior.shape[0]} prior maps for {c.shape[0]} frames")
    channels = LossCalculator.channels_of(c.shape[1], prior.shape[1])
    weights = LossCalculator.broadcast_prior(prior, channels)
    return float((weights * np.abs(c)).sum() + ((1.0 - weights) * np.abs(f)).sum())


def loss_reg(net1_weights: Union[GfcnParams, Iterable[np.ndarray]],
             net2_weights: Union[GfcnParams, Iterable[np.ndarray]],
             weight_decay: float) -> float:
    """lambda * (1/2 |W1|^2 + 1/2 |W2|^2); biases are not included"""
    total = 0.0
    for weights in (net1_weights, net2_weights):
        arrays: List[np.ndarray] = weights.weights() if isinstance(weights, GfcnParams) else list(weights)
        total += 0.5 * sum(float(np.sum(w * w)) for w in arrays)
    return weight_decay * total


def total_loss(reconst: float, decomp: float, reg: float, online: bool = False) -> float:
    """Sum of the terms; the online objective has no weight decay"""
    if online:
        return reconst + decomp
    return reconst + decomp + reg
