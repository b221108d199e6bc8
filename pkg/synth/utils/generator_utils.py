"""
Synthetic image sequences with exact ground truth

Per frame: background, multiplicative illumination gains on all channels,
objects drawn on top (unlit), ground-truth mask from object geometry only,
Gaussian noise, clamp to [0, 1].
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter

from common.utils import SynthConfigError
from sequence.models import Frame, Sequence, MaskSequence
from ..models import SynthConfig, SynthObject, IlluminationEvent

logger = logging.getLogger(__name__)

SHADOW_EDGE_SIGMA = 1.5
TEXTURE_SIGMA = 2.0


class SequenceSynthesizer:
    """
    Renders a SynthConfig into frames, masks and an event log
    """

    @staticmethod
    def frame_id(index: int, prefix: str = 'in') -> str:
        """CDnet-style id, numbered from 1"""
        return f"{prefix}{index + 1:06d}"

    @staticmethod
    def render_background(config: SynthConfig) -> np.ndarray:
        """(H, W, 3) static background, values within [0.15, 0.65]"""
        rng = np.random.default_rng(config.background_seed)
        height, width = config.height, config.width
        if config.background == 'flat':
            return np.broadcast_to(rng.uniform(0.3, 0.5, 3), (height, width, 3)).copy()
        if config.background == 'gradient':
            base = rng.uniform(0.35, 0.45, 3)
            slope_x = rng.uniform(-0.1, 0.1, 3)
            slope_y = rng.uniform(-0.1, 0.1, 3)
            xs = np.linspace(-1.0, 1.0, width)[np.newaxis, :, np.newaxis]
            ys = np.linspace(-1.0, 1.0, height)[:, np.newaxis, np.newaxis]
            return base + slope_x * xs + slope_y * ys
        noise = gaussian_filter(rng.normal(size=(height, width, 3)), sigma=(TEXTURE_SIGMA, TEXTURE_SIGMA, 0))
        low = noise.min(axis=(0, 1), keepdims=True)
        span = np.maximum(noise.max(axis=(0, 1), keepdims=True) - low, 1e-12)
        return 0.2 + 0.4 * (noise - low) / span

    @staticmethod
    def shadow_weight(event: IlluminationEvent, frame: int, width: int, height: int) -> np.ndarray:
        """(H, W) soft ellipse weight in [0, 1] at the event's position on frame"""
        offset = frame - event.start
        cx = event.center[0] + event.velocity[0] * offset
        cy = event.center[1] + event.velocity[1] * offset
        ys, xs = np.mgrid[0:height, 0:width]
        inside = ((xs - cx) / event.radii[0]) ** 2 + ((ys - cy) / event.radii[1]) ** 2 <= 1.0
        return np.clip(gaussian_filter(inside.astype(np.float64), sigma=SHADOW_EDGE_SIGMA), 0.0, 1.0)

    @staticmethod
    def gain_map(config: SynthConfig, frame: int) -> np.ndarray:
        """(H, W, 3) product of every active event's gain"""
        gains = np.ones((config.height, config.width, 3))
        for event in config.events:
            if not event.active(frame):
                continue
            if event.kind == 'soft_shadow':
                weight = SequenceSynthesizer.shadow_weight(event, frame, config.width, config.height)
                gains *= (1.0 - (1.0 - config.shadow_factor) * weight)[:, :, np.newaxis]
                continue
            gain = event.gain_at(frame) * np.asarray(event.tint if event.tint is not None else (1.0, 1.0, 1.0))
            if event.kind == 'global_gain':
                gains *= gain
            else:
                gains[:, :config.width // 2] *= gain
        return gains

    @staticmethod
    def object_box(obj: SynthObject, index: int, frame: int, config: SynthConfig) -> Tuple[int, int, int, int]:
        """
        (x, y, w, h) of an object on frame

        Raises:
            SynthConfigError: the object leaves the frame
        """
        offset = frame - obj.first_frame
        x = int(math.floor(obj.start[0] + obj.velocity[0] * offset))
        y = int(math.floor(obj.start[1] + obj.velocity[1] * offset))
        w, h = obj.size
        if x < 0 or y < 0 or x + w > config.width or y + h > config.height:
            raise SynthConfigError(
                f"Object {index} leaves the {config.width}x{config.height} frame on frame {frame} "
                f"(box {x},{y} {w}x{h})",
                details={'object': index, 'frame': frame}
            )
        return x, y, w, h

    @staticmethod
    def generate(config: SynthConfig) -> Tuple[Sequence, MaskSequence, Dict[str, Any]]:
        """
        Render every frame

        Returns:
            (sequence, masks, event_log): the log lists every event with its
            per-frame gains and every object with its per-frame boxes, using
            0-based frame indices
        """
        rng = np.random.default_rng(config.seed)
        background = SequenceSynthesizer.render_background(config)
        frames: List[Frame] = []
        masks: List[np.ndarray] = []
        boxes: List[List[List[int]]] = [[] for _ in config.objects]

        for t in range(config.n_frames):
            image = background * SequenceSynthesizer.gain_map(config, t)
            mask = np.zeros((config.height, config.width), dtype=np.uint8)
            for index, obj in enumerate(config.objects):
                if t < obj.first_frame or (obj.last_frame is not None and t > obj.last_frame):
                    continue
                x, y, w, h = SequenceSynthesizer.object_box(obj, index, t, config)
                image[y:y + h, x:x + w] = obj.color
                mask[y:y + h, x:x + w] = 1
                boxes[index].append([t, x, y, w, h])
            if config.noise_std > 0:
                image = image + rng.normal(0.0, config.noise_std, size=image.shape)
            frames.append(Frame.from_image(np.clip(image, 0.0, 1.0)))
            masks.append(mask)

        sequence = Sequence(frames=frames,
                            frame_ids=[SequenceSynthesizer.frame_id(t) for t in range(config.n_frames)])
        ground_truth = MaskSequence(masks=masks,
                                    frame_ids=[SequenceSynthesizer.frame_id(t, 'gt') for t in range(config.n_frames)],
                                    width=config.width, height=config.height)
        event_log = {
            'events': [
                {
                    'index': index,
                    'kind': event.kind,
                    'start': event.start,
                    'end': event.end,
                    'gains': [[t, event.gain_at(t)] for t in range(event.start, min(event.end, config.n_frames - 1) + 1)]
                    if event.kind != 'soft_shadow' else [],
                }
                for index, event in enumerate(config.events)
            ],
            'objects': [{'index': index, 'boxes': object_boxes} for index, object_boxes in enumerate(boxes)],
        }
        logger.info(
            f"Synthesized {config.n_frames} frames {config.width}x{config.height} with "
            f"{len(config.objects)} object(s) and {len(config.events)} illumination event(s)"
        )
        return sequence, ground_truth, event_log


def standard_fixture_config(seed: int = 7) -> SynthConfig:
    """
    64x64, 100 frames: one moving 8x8 object, a global gain ramp 0.6 -> 1.4
    over frames 30-70, one moving soft shadow, noise std 0.01
    """
    return SynthConfig(
        width=64,
        height=64,
        n_frames=100,
        background='gradient',
        background_seed=seed,
        objects=[SynthObject(size=(8, 8), color=(0.9, 0.15, 0.1), start=(4.0, 28.0), velocity=(0.5, 0.0))],
        events=[
            IlluminationEvent(kind='global_gain', start=30, end=70, magnitude=0.6, magnitude_end=1.4),
            IlluminationEvent(kind='soft_shadow', start=0, end=99, center=(12.0, 50.0),
                              velocity=(0.4, -0.1), radii=(9.0, 5.0)),
        ],
        shadow_factor=0.6,
        noise_std=0.01,
        seed=seed,
    )


def minimal_config(seed: int = 0) -> SynthConfig:
    """16x16, 20 frames, one 4x4 object, no events"""
    return SynthConfig(
        width=16,
        height=16,
        n_frames=20,
        background='gradient',
        background_seed=seed,
        objects=[SynthObject(size=(4, 4), color=(0.9, 0.9, 0.1), start=(1.0, 6.0), velocity=(0.5, 0.0))],
        noise_std=0.005,
        seed=seed,
    )


PRESETS = {
    'standard': standard_fixture_config,
    'minimal': minimal_config,
}


def generate(config: SynthConfig) -> Tuple[Sequence, MaskSequence, Dict[str, Any]]:
    """Render a synthetic sequence"""
    return SequenceSynthesizer.generate(config)
