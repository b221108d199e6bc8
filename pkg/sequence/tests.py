import tempfile
from pathlib import Path

import cv2
import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from PIL import Image

from common.utils import SequenceLoadError, DimensionMismatchError
from .models import Frame, Sequence, MaskSequence
from .utils import SequenceReader, ImageWriter, load_sequence, load_masks, save_image, save_sequence


class FrameTest(SimpleTestCase):

    def test_pixel_major_layout(self):
        image = np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 12.0
        frame = Frame.from_image(image)
        np.testing.assert_array_equal(frame.data[3:6], image[0, 1])
        np.testing.assert_array_equal(frame.as_image(), image)
        self.assertEqual((frame.width, frame.height, frame.channels, frame.pixel_count), (2, 2, 3, 4))

    def test_rejects_out_of_range_values(self):
        with self.assertRaises(ValidationError):
            Frame(data=np.array([0.5, 1.5]), width=2, height=1, channels=1)
        with self.assertRaises(ValidationError):
            Frame(data=np.array([0.5, np.nan]), width=2, height=1, channels=1)

    def test_rejects_bad_dimensions(self):
        with self.assertRaises(ValidationError):
            Frame(data=np.zeros(8), width=2, height=2, channels=2)
        with self.assertRaises(ValidationError):
            Frame(data=np.zeros(5), width=2, height=2, channels=1)

    def test_sequence_needs_one_shape(self):
        small = Frame(data=np.zeros(4), width=2, height=2, channels=1)
        large = Frame(data=np.zeros(9), width=3, height=3, channels=1)
        with self.assertRaises(ValidationError):
            Sequence(frames=[small, large], frame_ids=['a', 'b'])
        with self.assertRaises(ValidationError):
            Sequence(frames=[], frame_ids=[])
        with self.assertRaises(ValidationError):
            Sequence(frames=[small], frame_ids=['a', 'b'])

    def test_mask_sequence_is_binary(self):
        with self.assertRaises(ValidationError):
            MaskSequence(masks=[np.array([0, 2, 0, 1])], frame_ids=['a'], width=2, height=2)
        with self.assertRaises(ValidationError):
            MaskSequence(masks=[np.zeros(3)], frame_ids=['a'], width=2, height=2)


class ReadImagesTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_eight_bit_rgb(self):
        pixels = np.array([[[255, 0, 51], [0, 128, 255]]], dtype=np.uint8)
        Image.fromarray(pixels).save(self.root / 'in000002.png')
        Image.fromarray(pixels[:, ::-1].copy()).save(self.root / 'in000001.png')
        sequence = load_sequence(self.root)
        self.assertEqual(sequence.frame_ids, ['in000001', 'in000002'])
        np.testing.assert_allclose(sequence.frames[1].data, pixels.reshape(-1) / 255.0, rtol=0, atol=1e-15)

    def test_sixteen_bit_gray(self):
        pixels = np.array([[0, 65535], [32768, 1000]], dtype=np.uint16)
        cv2.imwrite(str(self.root / 'frame.png'), pixels)
        sequence = load_sequence(self.root)
        self.assertEqual(sequence.channels, 1)
        np.testing.assert_allclose(sequence.frames[0].data, pixels.reshape(-1) / 65535.0, rtol=0, atol=1e-15)

    def test_missing_and_empty_directories(self):
        with self.assertRaises(SequenceLoadError):
            load_sequence(self.root / 'absent')
        with self.assertRaises(SequenceLoadError):
            load_sequence(self.root)

    def test_mismatched_frame_sizes(self):
        Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(self.root / 'a.png')
        Image.fromarray(np.zeros((3, 2, 3), dtype=np.uint8)).save(self.root / 'b.png')
        with self.assertRaises(SequenceLoadError):
            load_sequence(self.root)

    def test_max_side_downsamples(self):
        Image.fromarray(np.full((40, 80, 3), 100, dtype=np.uint8)).save(self.root / 'a.png')
        sequence = load_sequence(self.root, max_side=20)
        self.assertEqual((sequence.width, sequence.height), (20, 10))
        self.assertEqual(SequenceReader.downsampled_shape(320, 240, 160), (160, 120))
        self.assertEqual(SequenceReader.downsampled_shape(100, 50, None), (100, 50))

    def test_cdnet_mask_shades(self):
        shades = np.array([[0, 50, 85], [170, 255, 200]], dtype=np.uint8)
        Image.fromarray(shades).save(self.root / 'gt000001.png')
        masks = load_masks(self.root)
        np.testing.assert_array_equal(masks.masks[0], [0, 0, 0, 0, 1, 1])
        self.assertIsNone(masks.roi)

        scored = load_masks(self.root, exclude_unknown=True)
        np.testing.assert_array_equal(scored.roi[0], [True, True, False, False, True, True])

    def test_static_roi(self):
        (self.root / 'gt').mkdir()
        Image.fromarray(np.full((2, 2), 255, dtype=np.uint8)).save(self.root / 'gt' / 'gt000001.png')
        Image.fromarray(np.array([[255, 0], [0, 255]], dtype=np.uint8)).save(self.root / 'roi.png')
        masks = load_masks(self.root / 'gt', roi_path=self.root / 'roi.png')
        np.testing.assert_array_equal(masks.roi[0], [True, False, False, True])


class WriteImagesTest(SimpleTestCase):

    def test_to_bytes(self):
        np.testing.assert_array_equal(ImageWriter.to_bytes(np.array([0.0, 0.5, 1.0, 1.7, -0.2])),
                                      [0, 128, 255, 255, 0])
        np.testing.assert_array_equal(ImageWriter.to_bytes(np.array([-1.0, 0.0, 1.0]), signed=True), [0, 128, 255])

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        levels = rng.integers(0, 256, size=(3, 4 * 3 * 3)) / 255.0
        with tempfile.TemporaryDirectory() as tmp:
            save_sequence(levels, ['a', 'b', 'c'], 4, 3, 3, tmp)
            sequence = load_sequence(tmp)
        np.testing.assert_allclose(sequence.matrix(), levels, rtol=0, atol=1e-12)
        self.assertEqual((sequence.width, sequence.height), (4, 3))

    def test_size_mismatch(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(DimensionMismatchError):
                save_image(np.zeros(5), 2, 2, 1, Path(tmp) / 'x.png')
