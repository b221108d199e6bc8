import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.test import SimpleTestCase

from common.utils import InvariantError
from sequence.models import Frame, Sequence
from sequence.utils import save_sequence, load_sequence
from .models import InvariantModel
from .serializers import InvariantModelSerializer
from .utils import InvariantTransformer, log_chromaticity, project_invariant, wiener_reflectance, psi, noise_level


def random_frame(seed, size=12, low=0.05, high=0.75):
    rng = np.random.default_rng(seed)
    return Frame.from_image(rng.uniform(low, high, size=(size, size, 3)))


def scaled(frame, gain):
    return Frame(data=frame.data * gain, width=frame.width, height=frame.height, channels=frame.channels)


class LogChromaticityTest(SimpleTestCase):

    def test_values(self):
        frame = Frame.from_image(np.array([[[0.5, 0.25, 1.0]]]))
        np.testing.assert_allclose(log_chromaticity(frame, epsilon_log=1e-12), [[math.log(2.0), math.log(4.0)]],
                                   rtol=0, atol=1e-10)

    def test_grayscale_rejected(self):
        frame = Frame.from_image(np.full((2, 2), 0.4))
        with self.assertRaises(InvariantError):
            log_chromaticity(frame)
        with self.assertRaises(InvariantError):
            project_invariant(frame, InvariantModel())


class GainInvarianceTest(SimpleTestCase):

    def test_projection_ignores_global_gain(self):
        frame = random_frame(0)
        model = InvariantModel(theta=0.7, epsilon_log=1e-12)
        axis = model.projection_axis
        before = log_chromaticity(frame, model.epsilon_log) @ axis
        after = log_chromaticity(scaled(frame, 1.3), model.epsilon_log) @ axis
        self.assertLessEqual(np.max(np.abs(before - after)), 1e-9)

    def test_psi_changes_little_under_gain(self):
        frame = random_frame(1, size=16)
        model = InvariantModel(theta=1.1)
        before = psi(frame, model).data
        after = psi(scaled(frame, 1.3), model).data
        self.assertLess(float(np.sqrt(np.mean((before - after) ** 2))), 0.05)


class CalibrationTest(SimpleTestCase):

    def _sequence(self, theta, seed=0):
        """Three materials whose log-chromaticities move along the illuminant direction theta"""
        rng = np.random.default_rng(seed)
        direction = np.array([math.cos(theta), math.sin(theta)])
        normal = np.array([-math.sin(theta), math.cos(theta)])
        materials = np.array([-0.2, 0.05, 0.25])[:, np.newaxis] * normal
        frames = []
        for _ in range(3):
            pick = rng.integers(0, 3, size=64)
            shift = rng.uniform(-0.3, 0.3, size=64)[:, np.newaxis]
            chroma = materials[pick] + shift * direction
            green = np.full(64, 0.4)
            rgb = np.stack([green * np.exp(chroma[:, 0]), green, green * np.exp(chroma[:, 1])], axis=1)
            frames.append(Frame(data=rgb.reshape(-1), width=8, height=8, channels=3))
        return Sequence(frames=frames, frame_ids=['a', 'b', 'c'])

    def test_finds_illuminant_direction(self):
        angles = InvariantTransformer.candidate_angles(180)
        theta = float(angles[40])
        found = InvariantTransformer.calibrate_direction(self._sequence(theta), 180, epsilon_log=1e-12)
        self.assertEqual(found, theta)

    def test_ties_go_to_smallest_angle(self):
        gray = Frame.from_image(np.full((4, 4, 3), 0.5))
        sequence = Sequence(frames=[gray, gray], frame_ids=['a', 'b'])
        self.assertEqual(InvariantTransformer.calibrate_direction(sequence, 36), 0.0)

    def test_grayscale_sequence_rejected(self):
        gray = Frame.from_image(np.full((4, 4), 0.5))
        with self.assertRaises(InvariantError):
            InvariantTransformer.calibrate_direction(Sequence(frames=[gray], frame_ids=['a']))

    def test_candidate_grid(self):
        angles = InvariantTransformer.candidate_angles(4)
        np.testing.assert_allclose(angles, [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])


class BranchTest(SimpleTestCase):

    def test_constant_normalizes_to_half(self):
        np.testing.assert_array_equal(InvariantTransformer.normalize_unit(np.full(7, 3.2)), np.full(7, 0.5))

    def test_normalize_range(self):
        values = InvariantTransformer.normalize_unit(np.array([2.0, 4.0, 3.0]))
        np.testing.assert_array_equal(values, [0.0, 1.0, 0.5])

    def test_zero_noise_reflectance_is_flat(self):
        result = wiener_reflectance(random_frame(2), InvariantModel(wiener_noise=0.0))
        np.testing.assert_array_equal(result.data, np.full(144, 0.5))

    def test_outputs_in_unit_range(self):
        for seed in range(5):
            result = psi(random_frame(seed, low=0.0, high=1.0), InvariantModel(theta=0.3))
            self.assertEqual(result.data.size, 144)
            self.assertGreaterEqual(result.data.min(), 0.0)
            self.assertLessEqual(result.data.max(), 1.0)

    def test_grayscale_uses_reflectance_only(self):
        frame = Frame.from_image(np.random.default_rng(3).uniform(0.1, 0.9, size=(10, 10)))
        model = InvariantModel()
        np.testing.assert_array_equal(psi(frame, model).data, wiener_reflectance(frame, model).data)

    def test_psi_sequence_keeps_order(self):
        frames = [random_frame(seed) for seed in range(4)]
        sequence = Sequence(frames=frames, frame_ids=['a', 'b', 'c', 'd'])
        model = InvariantModel(theta=0.5)
        results = InvariantTransformer.psi_sequence(sequence, model, threads=3)
        for frame, result in zip(frames, results):
            np.testing.assert_array_equal(result.data, psi(frame, model).data)


class NoiseLevelTest(SimpleTestCase):

    def test_white_noise_std_through_smooth_structure(self):
        rng = np.random.default_rng(5)
        smooth = np.linspace(0.2, 0.8, 4096)
        rows = np.stack([smooth + rng.normal(0.0, 0.03, size=4096), smooth + rng.normal(0.0, 0.07, size=4096)])
        levels = noise_level(rows)
        self.assertAlmostEqual(levels[0], 0.03, delta=0.003)
        self.assertAlmostEqual(levels[1], 0.07, delta=0.007)

    def test_edges_barely_move_the_estimate(self):
        rng = np.random.default_rng(6)
        values = rng.normal(0.5, 0.05, size=(64, 64))
        values[20:28, 30:38] += 0.4
        self.assertAlmostEqual(float(noise_level(values.reshape(-1))[0]), 0.05, delta=0.006)

    def test_constant_and_single_pixel_rows(self):
        np.testing.assert_array_equal(noise_level(np.full((2, 9), 0.5)), [0.0, 0.0])
        np.testing.assert_array_equal(noise_level(np.array([[0.3]])), [0.0])


class InvariantModelTest(SimpleTestCase):

    def test_validation(self):
        for kwargs in ({'theta': math.pi}, {'theta': -0.1}, {'wiener_window': 4}, {'wiener_window': 1},
                       {'wiener_noise': -1.0}, {'epsilon_log': 0.0}):
            with self.assertRaises(ValidationError):
                InvariantModel(**kwargs)

    def test_serializer(self):
        serializer = InvariantModelSerializer(data={'theta': 1.0, 'wiener_window': 5, 'wiener_noise': None,
                                                    'epsilon_log': 1e-4})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), InvariantModel(theta=1.0, wiener_window=5))
        self.assertFalse(InvariantModelSerializer(data={'theta': 4.0, 'wiener_window': 5,
                                                        'epsilon_log': 1e-4}).is_valid())


class InvariantCommandTest(SimpleTestCase):

    def test_writes_images_and_manifest(self):
        rng = np.random.default_rng(0)
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            save_sequence(rng.uniform(0.1, 0.9, size=(3, 6 * 5 * 3)), ['f1', 'f2', 'f3'], 6, 5, 3, root / 'frames')
            call_command('invariant', str(root / 'frames'), output=str(root / 'out'), theta=0.4)
            images = load_sequence(root / 'out')
            manifest = json.loads((root / 'out' / 'invariant.json').read_text())
        self.assertEqual(images.frame_ids, ['f1', 'f2', 'f3'])
        self.assertEqual((images.width, images.height, images.channels), (6, 5, 1))
        self.assertEqual(manifest['invariant_model']['theta'], 0.4)
        self.assertEqual(len(manifest['sigma']), 3)
        self.assertEqual(manifest['frame_shape'], [6, 5, 3])
