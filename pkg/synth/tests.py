import json
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from common.utils import SynthConfigError, EXIT_RUNTIME_FAILURE, EXIT_USAGE_ERROR
from sequence.utils import load_sequence, load_masks
from .models import SynthConfig, SynthObject, IlluminationEvent
from .serializers import SynthConfigSerializer
from .utils import SequenceSynthesizer, generate, standard_fixture_config, minimal_config


class GenerateTest(SimpleTestCase):

    def test_static_scene(self):
        sequence, masks, _ = generate(SynthConfig(width=8, height=6, n_frames=5))
        for frame in sequence.frames[1:]:
            np.testing.assert_array_equal(frame.data, sequence.frames[0].data)
        self.assertEqual(sum(int(mask.sum()) for mask in masks.masks), 0)
        self.assertEqual((sequence.width, sequence.height, sequence.channels), (8, 6, 3))
        self.assertEqual(sequence.frame_ids[0], 'in000001')
        self.assertEqual(masks.frame_ids[-1], 'gt000005')

    def test_object_mask(self):
        _, masks, log = generate(standard_fixture_config())
        self.assertEqual(int(masks.masks[10].sum()), 64)
        self.assertEqual(log['objects'][0]['boxes'][10], [10, 9, 28, 8, 8])

    def test_global_gain_scales_frame(self):
        plain = SynthConfig(width=10, height=10, n_frames=3)
        lit = replace(plain, events=[IlluminationEvent(kind='global_gain', start=1, end=1, magnitude=1.5)])
        reference, _, _ = generate(plain)
        sequence, _, log = generate(lit)
        np.testing.assert_allclose(sequence.frames[1].data, 1.5 * reference.frames[1].data, rtol=1e-12)
        np.testing.assert_array_equal(sequence.frames[2].data, reference.frames[2].data)
        self.assertEqual(log['events'][0]['gains'], [[1, 1.5]])

    def test_half_frame_gain_leaves_right_half(self):
        config = SynthConfig(width=8, height=4, n_frames=1,
                             events=[IlluminationEvent(kind='half_frame_gain', start=0, end=0, magnitude=0.5)])
        sequence, _, _ = generate(config)
        reference, _, _ = generate(replace(config, events=[]))
        image, base = sequence.frames[0].as_image(), reference.frames[0].as_image()
        np.testing.assert_allclose(image[:, :4], 0.5 * base[:, :4], rtol=1e-12)
        np.testing.assert_array_equal(image[:, 4:], base[:, 4:])

    def test_gain_ramp(self):
        event = IlluminationEvent(kind='global_gain', start=30, end=70, magnitude=0.6, magnitude_end=1.4)
        self.assertEqual(event.gain_at(30), 0.6)
        self.assertAlmostEqual(event.gain_at(50), 1.0, places=12)
        self.assertAlmostEqual(event.gain_at(70), 1.4, places=12)
        self.assertFalse(event.active(71))

    def test_shadow_darkens_without_touching_masks(self):
        config = standard_fixture_config()
        shadowed, shadow_masks, _ = generate(config)
        plain, plain_masks, _ = generate(replace(config, events=[], noise_std=0.0))
        for lit, dark in zip(plain_masks.masks, shadow_masks.masks):
            np.testing.assert_array_equal(lit, dark)
        weight = SequenceSynthesizer.shadow_weight(config.events[1], 0, 64, 64)
        self.assertGreater(weight[50, 12], 0.9)
        self.assertEqual(weight[0, 63], 0.0)

    def test_same_seed_same_frames(self):
        first, _, _ = generate(standard_fixture_config(seed=3))
        second, _, _ = generate(standard_fixture_config(seed=3))
        np.testing.assert_array_equal(first.matrix(), second.matrix())

    def test_values_stay_in_unit_range(self):
        config = replace(minimal_config(), noise_std=0.3)
        sequence, _, _ = generate(config)
        matrix = sequence.matrix()
        self.assertGreaterEqual(matrix.min(), 0.0)
        self.assertLessEqual(matrix.max(), 1.0)

    def test_object_leaving_frame(self):
        config = SynthConfig(width=16, height=16, n_frames=20,
                             objects=[SynthObject(size=(4, 4), start=(10.0, 2.0), velocity=(1.0, 0.0))])
        with self.assertRaises(SynthConfigError):
            generate(config)

    def test_texture_background_range(self):
        background = SequenceSynthesizer.render_background(SynthConfig(width=20, height=20, background='texture'))
        self.assertAlmostEqual(background.min(), 0.2, places=12)
        self.assertAlmostEqual(background.max(), 0.6, places=12)

    def test_invalid_config(self):
        with self.assertRaises(ValidationError):
            SynthConfig(background='checkerboard')
        with self.assertRaises(ValidationError):
            IlluminationEvent(kind='global_gain', start=5, end=2)


class SynthConfigSerializerTest(SimpleTestCase):

    def test_parses_scene(self):
        payload = {
            'width': 12, 'height': 10, 'n_frames': 4,
            'objects': [{'size': [2, 3], 'color': [1.0, 0.0, 0.0], 'start': [1, 1], 'velocity': [1, 0]}],
            'events': [{'kind': 'soft_shadow', 'start': 0, 'end': 3, 'center': [5, 5], 'radii': [3, 2]}],
        }
        serializer = SynthConfigSerializer(data=payload)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.validated_data
        self.assertEqual(config.objects[0].size, (2, 3))
        self.assertEqual(config.events[0].radii, (3.0, 2.0))
        self.assertEqual(config.background, 'gradient')

    def test_dump_parses_back(self):
        config = standard_fixture_config()
        serializer = SynthConfigSerializer(data=json.loads(json.dumps(SynthConfigSerializer(config).data)))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data, config)

    def test_rejects_unknown_event(self):
        payload = {'width': 4, 'height': 4, 'n_frames': 2, 'events': [{'kind': 'flash', 'start': 0, 'end': 1}]}
        self.assertFalse(SynthConfigSerializer(data=payload).is_valid())


class SynthCommandTest(SimpleTestCase):

    def test_writes_dataset(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = Path(tmp) / 'scene'
            call_command('synth', str(output), preset='minimal', frames=6, seed=2)
            sequence = load_sequence(output / 'input')
            masks = load_masks(output / 'groundtruth')
            log = json.loads((output / 'events.json').read_text())
        self.assertEqual(len(sequence), 6)
        self.assertEqual((sequence.width, sequence.height, sequence.channels), (16, 16, 3))
        self.assertEqual([int(m.sum()) for m in masks.masks], [16] * 6)
        self.assertEqual(log['config']['n_frames'], 6)
        self.assertEqual(log['config']['seed'], 2)
        self.assertEqual(len(log['objects'][0]['boxes']), 6)

    def test_spec_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            spec = Path(tmp) / 'scene.json'
            spec.write_text(json.dumps({'width': 5, 'height': 7, 'n_frames': 3, 'background': 'flat'}))
            call_command('synth', str(Path(tmp) / 'scene'), spec=str(spec))
            sequence = load_sequence(Path(tmp) / 'scene' / 'input')
        self.assertEqual((len(sequence), sequence.width, sequence.height), (3, 5, 7))

    def test_invalid_spec_is_usage_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            spec = Path(tmp) / 'scene.json'
            spec.write_text('{"width": 0}')
            with self.assertRaises(CommandError) as raised:
                call_command('synth', str(Path(tmp) / 'scene'), spec=str(spec))
        self.assertEqual(raised.exception.returncode, EXIT_USAGE_ERROR)

    def test_object_outside_frame_is_runtime_failure(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as raised:
                call_command('synth', str(Path(tmp) / 'scene'), preset='minimal', width=6)
        self.assertEqual(raised.exception.returncode, EXIT_RUNTIME_FAILURE)
