import json
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from .utils import (
    PipelineCommand,
    RunConfigLoader,
    RunManifest,
    CheckpointError,
    DimensionMismatchError,
    array_checksum,
    check_same_shape,
    EXIT_RUNTIME_FAILURE,
    EXIT_USAGE_ERROR,
)


class RunConfigLoaderTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.config_file = Path(self.tmp.name) / 'run.env'

    def tearDown(self):
        self.tmp.cleanup()

    def test_defaults(self):
        config = RunConfigLoader().load()
        self.assertEqual(config['latent_dim'], 5)
        self.assertEqual(config['hidden_sizes'], (10, 20))
        self.assertEqual(config['mode'], 'batch')
        self.assertIsNone(config['theta'])

    def test_precedence(self):
        self.config_file.write_text('EPOCHS=40\nlearning_rate=0.01\nHIDDEN_SIZES=6,8\n')
        config = RunConfigLoader().load(self.config_file, {'epochs': 7, 'seed': None})
        self.assertEqual(config['epochs'], 7)
        self.assertEqual(config['learning_rate'], 0.01)
        self.assertEqual(config['hidden_sizes'], (6, 8))
        self.assertEqual(config['seed'], 0)

    @override_settings(NUMOD_DEFAULTS={'latent_dim': 3})
    def test_incomplete_defaults_are_rejected(self):
        with self.assertRaises(ValidationError):
            RunConfigLoader().load()

    def test_invalid_values(self):
        for overrides in ({'pretrain_fraction': 1.0}, {'learning_rate': 0.0}, {'wiener_window': 8},
                          {'prior_mode': 'linear'}, {'theta': 3.5}, {'epochs': 0}):
            with self.assertRaises(ValidationError):
                RunConfigLoader().load(overrides=overrides)

    def test_invalid_file_value(self):
        self.config_file.write_text('EPOCHS=many\n')
        with self.assertRaises(ValidationError):
            RunConfigLoader().load(self.config_file)

    def test_missing_file(self):
        with self.assertRaises(ValidationError):
            RunConfigLoader().load(self.config_file)


class FailingCommand(PipelineCommand):

    def __init__(self, error):
        super().__init__()
        self.error = error

    def run(self, *args, **options):
        raise self.error


class PipelineCommandTest(SimpleTestCase):

    def _returncode(self, error):
        with self.assertRaises(CommandError) as raised:
            FailingCommand(error).handle()
        return raised.exception.returncode

    def test_exit_codes(self):
        self.assertEqual(self._returncode(ValidationError('bad flag')), EXIT_USAGE_ERROR)
        self.assertEqual(self._returncode(CheckpointError('corrupt')), EXIT_RUNTIME_FAILURE)
        self.assertEqual(self._returncode(OSError('disk full')), EXIT_RUNTIME_FAILURE)

    def test_unexpected_errors_propagate(self):
        with self.assertRaises(KeyError):
            FailingCommand(KeyError('bug')).handle()

    def test_path_checks(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            (root / 'file.txt').write_text('x')
            self.assertEqual(PipelineCommand.require_directory(root, 'Data'), root)
            self.assertEqual(PipelineCommand.require_file(root / 'file.txt', 'File'), root / 'file.txt')
            self.assertEqual(PipelineCommand.require_output_directory(root / 'new'), root / 'new')
            self.assertFalse((root / 'new').exists())
            with self.assertRaises(ValidationError):
                PipelineCommand.require_directory(root / 'file.txt', 'Data')
            with self.assertRaises(ValidationError):
                PipelineCommand.require_file(root / 'missing', 'File')
            with self.assertRaises(ValidationError):
                PipelineCommand.require_output_directory(root / 'file.txt')


class ManifestTest(SimpleTestCase):

    def test_identical_inputs_give_identical_bytes(self):
        config = {'seed': 1, 'hidden_sizes': (10, 20)}
        with tempfile.TemporaryDirectory() as tmp:
            paths = []
            for name in ('a.json', 'b.json'):
                manifest = RunManifest('train', config)
                manifest.update({'sigma': np.array([0.25, 0.5]), 'count': np.int64(3)})
                manifest.set('path', Path('/data/run'))
                paths.append(manifest.write(Path(tmp) / name))
            first, second = (path.read_bytes() for path in paths)
            payload = json.loads(first)
        self.assertEqual(first, second)
        self.assertEqual(payload['sigma'], [0.25, 0.5])
        self.assertEqual(payload['config']['hidden_sizes'], [10, 20])
        self.assertEqual(payload['command'], 'train')
        self.assertEqual(payload['path'], '/data/run')

    def test_checksum(self):
        a, b = np.arange(4.0), np.ones(3)
        self.assertEqual(array_checksum(a, b), array_checksum(a.copy(), b.copy()))
        self.assertNotEqual(array_checksum(a, b), array_checksum(b, a))
        self.assertEqual(array_checksum(np.arange(4)), array_checksum(np.arange(4.0)))
        self.assertEqual(len(array_checksum(a)), 64)


class ShapeCheckTest(SimpleTestCase):

    def test_check_same_shape(self):
        check_same_shape('frames', (2, 3), (2, 3))
        check_same_shape('length', 4, 4)
        with self.assertRaises(DimensionMismatchError) as raised:
            check_same_shape('frames', (2, 3), (3, 2))
        self.assertEqual(raised.exception.details, {'expected': [2, 3], 'actual': [3, 2]})
        self.assertEqual(raised.exception.as_dict()['error_code'], 'DIMENSION_MISMATCH')
