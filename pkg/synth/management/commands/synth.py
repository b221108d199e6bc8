import json
import logging
from dataclasses import replace
from pathlib import Path

from django.core.exceptions import ValidationError

from common.utils import PipelineCommand, write_json
from sequence.utils import save_sequence
from ...serializers import SynthConfigSerializer
from ...utils import PRESETS, generate

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Generate a synthetic sequence with ground truth (input/, groundtruth/, events.json)'

    def add_arguments(self, parser):
        parser.add_argument('output', help='Dataset directory to create')
        parser.add_argument('--preset', choices=sorted(PRESETS), default='standard',
                            help='Built-in scene (default: standard)')
        parser.add_argument('--spec', default=None, help='JSON scene description; replaces the preset')
        parser.add_argument('--frames', type=int, default=None, help='Override the frame count')
        parser.add_argument('--width', type=int, default=None, help='Override the frame width')
        parser.add_argument('--height', type=int, default=None, help='Override the frame height')
        parser.add_argument('--noise', type=float, default=None, help='Override the noise std')
        parser.add_argument('--seed', type=int, default=None, help='Noise seed')

    def _load_spec(self, path):
        path = Path(path)
        try:
            payload = json.loads(path.read_text())
        except (OSError, ValueError) as e:
            raise ValidationError(f"Cannot read scene file {path}: {e}")
        serializer = SynthConfigSerializer(data=payload)
        if not serializer.is_valid():
            raise ValidationError(f"Invalid scene file {path}: {serializer.errors}")
        return serializer.validated_data

    def run(self, *args, **options):
        output = self.require_output_directory(options['output'])

        config = self._load_spec(options['spec']) if options['spec'] else PRESETS[options['preset']]()
        overrides = {
            'n_frames': options['frames'],
            'width': options['width'],
            'height': options['height'],
            'noise_std': options['noise'],
            'seed': options['seed'],
        }
        overrides = {key: value for key, value in overrides.items() if value is not None}
        if overrides:
            config = replace(config, **overrides)

        sequence, masks, event_log = generate(config)

        save_sequence(sequence.matrix(), sequence.frame_ids, config.width, config.height, 3, output / 'input')
        save_sequence([mask.astype(float) for mask in masks.masks], masks.frame_ids,
                      config.width, config.height, 1, output / 'groundtruth')
        event_log['config'] = SynthConfigSerializer(config).data
        write_json(output / 'events.json', event_log)

        self.success(f"Wrote {len(sequence)} frames to {output}")
