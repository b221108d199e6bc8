"""
Image sequence I/O for the detection pipeline
Reads directory-of-frames datasets (8/16-bit PNG, PGM/PPM) and writes PNG
outputs. Frames are normalized by their integer type maximum to [0, 1].
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import cv2
import numpy as np
from PIL import Image

from common.utils import SequenceLoadError, ImageWriteError, check_same_shape
from ..models import Frame, Sequence, MaskSequence

logger = logging.getLogger(__name__)


class SequenceReader:
    """
    Loads frames and ground-truth masks from a directory
    """

    TYPE_MAXIMUM = {
        np.dtype(np.uint8): 255.0,
        np.dtype(np.uint16): 65535.0,
    }

    # CDnet ground-truth shades
    SHADE_STATIC = 0
    SHADE_HARD_SHADOW = 50
    SHADE_OUTSIDE_ROI = 85
    SHADE_UNKNOWN = 170
    SHADE_MOTION = 255
    MASK_THRESHOLD = 128

    @staticmethod
    def list_files(directory, pattern: str) -> List[Path]:
        """
        Files in directory matching pattern, sorted by filename

        Raises:
            SequenceLoadError: missing directory or no matches
        """
        directory = Path(directory)
        if not directory.is_dir():
            raise SequenceLoadError(f"Directory not found: {directory}", details={'path': str(directory)})
        paths = sorted((p for p in directory.glob(pattern) if p.is_file()), key=lambda p: p.name)
        if not paths:
            raise SequenceLoadError(
                f"No files matching '{pattern}' in {directory}",
                details={'path': str(directory), 'pattern': pattern}
            )
        return paths

    @staticmethod
    def decode(path: Path) -> np.ndarray:
        """
        Decode one image to a float64 (H, W, C) array in [0, 1], RGB order

        Raises:
            SequenceLoadError: undecodable file or unsupported bit depth
        """
        raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if raw is None:
            raise SequenceLoadError(f"Cannot decode image: {path.name}", details={'file': path.name})
        maximum = SequenceReader.TYPE_MAXIMUM.get(raw.dtype)
        if maximum is None:
            raise SequenceLoadError(
                f"Unsupported pixel type {raw.dtype} in {path.name}; expected 8- or 16-bit",
                details={'file': path.name}
            )
        if raw.ndim == 2:
            image = raw[:, :, np.newaxis]
        elif raw.shape[2] == 3:
            image = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
        elif raw.shape[2] == 4:
            image = cv2.cvtColor(raw, cv2.COLOR_BGRA2RGB)
        else:
            raise SequenceLoadError(
                f"Unsupported channel count {raw.shape[2]} in {path.name}",
                details={'file': path.name}
            )
        return image.astype(np.float64) / maximum

    @staticmethod
    def decode_gray_bytes(path: Path) -> np.ndarray:
        """Decode a mask image to a uint8 (H, W) array"""
        raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if raw is None:
            raise SequenceLoadError(f"Cannot decode mask: {path.name}", details={'file': path.name})
        if raw.dtype == np.uint16:
            raw = (raw >> 8).astype(np.uint8)
        elif raw.dtype != np.uint8:
            raise SequenceLoadError(
                f"Unsupported mask pixel type {raw.dtype} in {path.name}",
                details={'file': path.name}
            )
        if raw.ndim == 3:
            code = cv2.COLOR_BGRA2GRAY if raw.shape[2] == 4 else cv2.COLOR_BGR2GRAY
            raw = cv2.cvtColor(raw, code)
        return raw

    @staticmethod
    def downsampled_shape(width: int, height: int, max_side: Optional[int]) -> Tuple[int, int]:
        """Target (width, height) so that max(width, height) <= max_side"""
        if not max_side or max(width, height) <= max_side:
            return width, height
        scale = max_side / max(width, height)
        return max(1, min(max_side, int(width * scale))), max(1, min(max_side, int(height * scale)))

    @staticmethod
    def resize_nearest(image: np.ndarray, width: int, height: int) -> np.ndarray:
        """Nearest-neighbor resize, channel axis preserved"""
        if image.shape[1] == width and image.shape[0] == height:
            return image
        resized = cv2.resize(image, (width, height), interpolation=cv2.INTER_NEAREST_EXACT)
        if resized.ndim == 2 and image.ndim == 3:
            resized = resized[:, :, np.newaxis]
        return resized

    @staticmethod
    def _check_consistent(paths: List[Path], shapes: List[tuple]) -> None:
        for path, shape in zip(paths[1:], shapes[1:]):
            if shape != shapes[0]:
                raise SequenceLoadError(
                    f"Image {path.name} has shape {shape}, expected {shapes[0]} like {paths[0].name}",
                    details={'file': path.name}
                )

    @staticmethod
    def load_sequence(
        directory,
        pattern: str = '*.png',
        max_side: Optional[int] = None,
        threads: int = 1
    ) -> Sequence:
        """
        Load an image sequence

        Args:
            directory: Directory holding the frames
            pattern: Filename glob
            max_side: Optional bound on max(width, height), nearest-neighbor
            threads: Decoding threads; frame order never depends on it

        Returns:
            Sequence: frames sorted by filename, values in [0, 1]
        """
        paths = SequenceReader.list_files(directory, pattern)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
            images = list(executor.map(SequenceReader.decode, paths))
        SequenceReader._check_consistent(paths, [image.shape for image in images])

        height, width, channels = images[0].shape
        target_width, target_height = SequenceReader.downsampled_shape(width, height, max_side)
        if (target_width, target_height) != (width, height):
            logger.info(f"Downsampling {width}x{height} -> {target_width}x{target_height}")
            images = [SequenceReader.resize_nearest(image, target_width, target_height) for image in images]

        frames = [Frame.from_image(image) for image in images]
        frame_ids = [path.stem for path in paths]
        logger.info(f"Loaded {len(frames)} frames {target_width}x{target_height}x{channels} from {directory}")
        return Sequence(frames=frames, frame_ids=frame_ids)

    @staticmethod
    def load_masks(
        directory,
        pattern: str = '*.png',
        max_side: Optional[int] = None,
        exclude_unknown: bool = False,
        roi_path=None,
        threads: int = 1
    ) -> MaskSequence:
        """
        Load binary ground-truth masks

        Values >= 128 are foreground except the CDnet "unknown" shade 170,
        which maps to 0. With exclude_unknown, pixels shaded 170 (unknown)
        or 85 (outside ROI) are dropped from the per-frame roi. roi_path
        optionally names a static ROI image (nonzero = evaluated).

        Returns:
            MaskSequence: masks sorted by filename
        """
        paths = SequenceReader.list_files(directory, pattern)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
            shades = list(executor.map(SequenceReader.decode_gray_bytes, paths))
        SequenceReader._check_consistent(paths, [shade.shape for shade in shades])

        height, width = shades[0].shape
        target_width, target_height = SequenceReader.downsampled_shape(width, height, max_side)
        shades = [SequenceReader.resize_nearest(shade, target_width, target_height) for shade in shades]

        masks = [
            ((shade >= SequenceReader.MASK_THRESHOLD) & (shade != SequenceReader.SHADE_UNKNOWN)).astype(np.uint8)
            for shade in shades
        ]

        static_roi = None
        if roi_path is not None:
            roi_shade = SequenceReader.decode_gray_bytes(Path(roi_path))
            check_same_shape(f"ROI {Path(roi_path).name}", (height, width), roi_shade.shape)
            static_roi = SequenceReader.resize_nearest(roi_shade, target_width, target_height) > 0

        roi = None
        if exclude_unknown or static_roi is not None:
            roi = []
            for shade in shades:
                region = np.ones(shade.shape, dtype=bool)
                if exclude_unknown:
                    region &= (shade != SequenceReader.SHADE_UNKNOWN) & (shade != SequenceReader.SHADE_OUTSIDE_ROI)
                if static_roi is not None:
                    region &= static_roi
                roi.append(region)

        return MaskSequence(
            masks=masks,
            frame_ids=[path.stem for path in paths],
            width=target_width,
            height=target_height,
            roi=roi
        )


class ImageWriter:
    """
    Writes vectorized images as 8-bit PNG
    """

    @staticmethod
    def to_bytes(data: np.ndarray, signed: bool = False) -> np.ndarray:
        """
        Map values to uint8

        Signed images are stored as 0.5 + value / 2. Values are clamped to
        [0, 1] and rounded half to even, so 0.5 becomes 128.
        """
        values = np.asarray(data, dtype=np.float64)
        if signed:
            values = 0.5 + values / 2.0
        values = np.clip(values, 0.0, 1.0)
        return np.round(values * 255.0).astype(np.uint8)

    @staticmethod
    def save_image(
        data: np.ndarray,
        width: int,
        height: int,
        channels: int,
        path,
        signed: bool = False
    ) -> Path:
        """
        Write one image as PNG

        Args:
            data: Vector of length width * height * channels
            width, height, channels: Image dimensions
            path: Output file
            signed: Use the 0.5 + value / 2 encoding

        Returns:
            Path: the written file
        """
        path = Path(path)
        check_same_shape(f"image {path.name}", width * height * channels, np.asarray(data).size)
        pixels = ImageWriter.to_bytes(data, signed=signed).reshape(height, width, channels)
        image = Image.fromarray(pixels[:, :, 0] if channels == 1 else pixels)
        try:
            image.save(path, format='PNG')
        except (OSError, ValueError) as e:
            raise ImageWriteError(f"Cannot write {path}: {e}", details={'path': str(path)})
        return path

    @staticmethod
    def save_mask(mask: np.ndarray, width: int, height: int, path) -> Path:
        """Write a binary mask as 0/255 PNG"""
        return ImageWriter.save_image(np.asarray(mask, dtype=np.float64), width, height, 1, path)


def load_sequence(directory, pattern='*.png', max_side=None, threads=1) -> Sequence:
    """Load a frame sequence from a directory"""
    return SequenceReader.load_sequence(directory, pattern, max_side=max_side, threads=threads)


def load_masks(directory, pattern='*.png', max_side=None, exclude_unknown=False, roi_path=None,
               threads=1) -> MaskSequence:
    """Load ground-truth masks from a directory"""
    return SequenceReader.load_masks(directory, pattern, max_side=max_side,
                                     exclude_unknown=exclude_unknown, roi_path=roi_path, threads=threads)


def save_image(data, width, height, channels, path, signed=False) -> Path:
    """Write a vectorized image as PNG"""
    return ImageWriter.save_image(data, width, height, channels, path, signed=signed)


def save_sequence(frames: np.ndarray, frame_ids: List[str], width: int, height: int, channels: int,
                  directory, signed: bool = False) -> List[Path]:
    """Write a stack of images as <directory>/<frame_id>.png"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [
        ImageWriter.save_image(row, width, height, channels, directory / f"{frame_id}.png", signed=signed)
        for frame_id, row in zip(frame_ids, frames)
    ]
