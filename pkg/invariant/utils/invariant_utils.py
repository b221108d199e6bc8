"""
Illumination invariant image representation

Two branches, each min-max normalized per frame and then averaged:
  * projection of the log-chromaticity (log(R/G), log(B/G)) onto the axis
    orthogonal to the illumination direction e
  * homomorphic reflectance: log-luminance minus its locally adaptive
    Wiener-smoothed version
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
from scipy.ndimage import uniform_filter
from scipy.stats import entropy, median_abs_deviation

from common.utils import InvariantError
from sequence.models import Frame, Sequence
from ..models import InvariantModel, InvariantFrame

logger = logging.getLogger(__name__)


class InvariantTransformer:
    """
    Computes the invariant representation of frames
    """

    LUMINANCE_WEIGHTS = np.array([0.299, 0.587, 0.114])
    HISTOGRAM_BINS = 64
    CALIBRATION_FRAMES = 10
    # Spans below this are treated as a constant image
    DEGENERATE_SPAN = 1e-12
    VARIANCE_FLOOR = 1e-12

    @staticmethod
    def normalize_unit(values: np.ndarray) -> np.ndarray:
        """
        Min-max normalize to [0, 1]; a constant input maps to all 0.5
        """
        low, high = float(values.min()), float(values.max())
        if high - low <= InvariantTransformer.DEGENERATE_SPAN:
            return np.full(values.shape, 0.5)
        return np.clip((values - low) / (high - low), 0.0, 1.0)

    @staticmethod
    def _require_rgb(frame: Frame, operation: str) -> None:
        if frame.channels != 3:
            raise InvariantError(
                f"{operation} needs an RGB frame, got {frame.channels} channel(s)",
                details={'channels': frame.channels}
            )

    @staticmethod
    def log_chromaticity(frame: Frame, epsilon_log: float = 1e-4) -> np.ndarray:
        """
        Per-pixel (log((R+e)/(G+e)), log((B+e)/(G+e)))

        Args:
            frame: RGB frame
            epsilon_log: Floor added before the logarithms

        Returns:
            np.ndarray: (pixels, 2) chromaticities
        """
        InvariantTransformer._require_rgb(frame, 'log_chromaticity')
        rgb = frame.data.reshape(-1, 3) + epsilon_log
        log_green = np.log(rgb[:, 1])
        return np.stack([np.log(rgb[:, 0]) - log_green, np.log(rgb[:, 2]) - log_green], axis=1)

    @staticmethod
    def candidate_angles(n_angles: int) -> np.ndarray:
        """Uniform grid of n_angles values in [0, pi)"""
        return np.arange(n_angles) * (math.pi / n_angles)

    @staticmethod
    def projection_entropy(chromaticities: np.ndarray, theta: float) -> float:
        """Shannon entropy of the 64-bin histogram of projections orthogonal to theta"""
        axis = np.array([-math.sin(theta), math.cos(theta)])
        counts, _ = np.histogram(chromaticities @ axis, bins=InvariantTransformer.HISTOGRAM_BINS)
        return float(entropy(counts))

    @staticmethod
    def calibrate_direction(
        sequence: Sequence,
        n_angles: int = 180,
        epsilon_log: float = 1e-4,
        sample_frames: int = CALIBRATION_FRAMES
    ) -> float:
        """
        Estimate the illumination direction by entropy minimization

        Chromaticities from up to sample_frames evenly spaced frames are
        pooled; the angle whose orthogonal projection has the lowest
        histogram entropy wins, ties going to the smallest angle.

        Returns:
            float: theta in [0, pi)
        """
        if n_angles < 1:
            raise InvariantError(f"Need at least one candidate angle, got {n_angles}")
        if sequence.channels != 3:
            raise InvariantError("Direction calibration needs an RGB sequence")

        count = min(len(sequence), max(1, sample_frames))
        indices = np.unique(np.linspace(0, len(sequence) - 1, count).round().astype(int))
        chromaticities = np.concatenate([
            InvariantTransformer.log_chromaticity(sequence.frames[i], epsilon_log) for i in indices
        ])

        angles = InvariantTransformer.candidate_angles(n_angles)
        entropies = np.array([
            InvariantTransformer.projection_entropy(chromaticities, theta) for theta in angles
        ])
        best = int(np.argmin(entropies))
        logger.info(
            f"Calibrated invariant direction: theta={angles[best]:.4f} rad "
            f"(entropy {entropies[best]:.4f}, {len(indices)} frames, {n_angles} angles)"
        )
        return float(angles[best])

    @staticmethod
    def project_invariant(frame: Frame, model: InvariantModel) -> InvariantFrame:
        """
        Projection of log-chromaticities onto the axis orthogonal to e,
        min-max normalized over the frame
        """
        InvariantTransformer._require_rgb(frame, 'project_invariant')
        projection = InvariantTransformer.log_chromaticity(frame, model.epsilon_log) @ model.projection_axis
        return InvariantFrame(
            data=InvariantTransformer.normalize_unit(projection),
            width=frame.width,
            height=frame.height
        )

    @staticmethod
    def luminance(frame: Frame) -> np.ndarray:
        """(H, W) luminance; grayscale frames pass through"""
        image = frame.as_image()
        if frame.channels == 1:
            return image[:, :, 0]
        return image @ InvariantTransformer.LUMINANCE_WEIGHTS

    @staticmethod
    def wiener_reflectance(frame: Frame, model: InvariantModel) -> InvariantFrame:
        """
        Homomorphic reflectance estimate

        x = log(luminance + e). Illumination is the locally adaptive Wiener
        estimate mu + max(v - noise, 0) / max(v, tiny) * (x - mu) with
        per-window mean mu and variance v; reflectance is x minus it.
        With zero noise the filter is the identity, so the reflectance is
        identically zero and the output is all 0.5.
        """
        log_luminance = np.log(InvariantTransformer.luminance(frame) + model.epsilon_log)
        window = model.wiener_window
        local_mean = uniform_filter(log_luminance, size=window, mode='reflect')
        local_variance = np.maximum(
            uniform_filter(log_luminance * log_luminance, size=window, mode='reflect') - local_mean ** 2,
            0.0
        )

        noise = float(np.median(local_variance)) if model.wiener_noise is None else model.wiener_noise
        if noise <= 0.0:
            reflectance = np.zeros_like(log_luminance)
        else:
            gain = np.maximum(local_variance - noise, 0.0) / np.maximum(
                local_variance, InvariantTransformer.VARIANCE_FLOOR)
            illumination = local_mean + gain * (log_luminance - local_mean)
            reflectance = log_luminance - illumination

        return InvariantFrame(
            data=InvariantTransformer.normalize_unit(reflectance.reshape(-1)),
            width=frame.width,
            height=frame.height
        )

    @staticmethod
    def psi(frame: Frame, model: InvariantModel) -> InvariantFrame:
        """
        Invariant image: mean of the projection and reflectance branches

        Grayscale frames have no chromaticity, so only the reflectance
        branch is used for them.
        """
        reflectance = InvariantTransformer.wiener_reflectance(frame, model)
        if frame.channels != 3:
            return reflectance
        projection = InvariantTransformer.project_invariant(frame, model)
        return InvariantFrame(
            data=np.clip(0.5 * (projection.data + reflectance.data), 0.0, 1.0),
            width=frame.width,
            height=frame.height
        )

    @staticmethod
    def noise_level(values: np.ndarray) -> np.ndarray:
        """
        Pixel noise std of each row of invariant values

        Normal-scaled MAD of the differences between consecutive pixels,
        divided by sqrt(2). Smooth structure and object boundaries touch few
        differences, so they barely move the estimate.
        """
        rows = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if rows.shape[1] < 2:
            return np.zeros(rows.shape[0])
        return median_abs_deviation(np.diff(rows, axis=1), axis=1, scale='normal') / math.sqrt(2.0)

    @staticmethod
    def psi_sequence(sequence: Sequence, model: InvariantModel, threads: int = 1) -> List[InvariantFrame]:
        """psi of every frame, in frame order"""
        if sequence.channels != 3:
            logger.warning("Grayscale sequence: invariant image uses the reflectance branch only")
        with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
            return list(executor.map(lambda frame: InvariantTransformer.psi(frame, model), sequence.frames))


def log_chromaticity(frame: Frame, epsilon_log: float = 1e-4) -> np.ndarray:
    """Per-pixel 2D log-chromaticity"""
    return InvariantTransformer.log_chromaticity(frame, epsilon_log)


def calibrate_direction(sequence: Sequence, n_angles: int = 180, epsilon_log: float = 1e-4) -> float:
    """Entropy-minimizing illumination direction"""
    return InvariantTransformer.calibrate_direction(sequence, n_angles, epsilon_log)


def project_invariant(frame: Frame, model: InvariantModel) -> InvariantFrame:
    """Chromaticity projection branch"""
    return InvariantTransformer.project_invariant(frame, model)


def wiener_reflectance(frame: Frame, model: InvariantModel) -> InvariantFrame:
    """Wiener reflectance branch"""
    return InvariantTransformer.wiener_reflectance(frame, model)


def psi(frame: Frame, model: InvariantModel) -> InvariantFrame:
    """Fused invariant image"""
    return InvariantTransformer.psi(frame, model)


def invariant_matrix(frames: List[InvariantFrame]) -> np.ndarray:
    """(n_frames, pixels) stack of invariant images"""
    return np.stack([frame.data for frame in frames])


def noise_level(values: np.ndarray) -> np.ndarray:
    """Robust pixel noise std per row of invariant values"""
    return InvariantTransformer.noise_level(values)
