import logging
from dataclasses import replace

from common.utils import PipelineCommand, RunConfigLoader, RunManifest, check_same_shape
from invariant.utils import InvariantTransformer
from sequence.utils import load_sequence
from ...decomposition_service import DecompositionService
from ...utils import dataset_input_dir, load_checkpoint, save_checkpoint, write_decompositions

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = ('Decompose new frames with a trained checkpoint: networks stay frozen, only the '
            'per-frame variables are fitted')

    def add_arguments(self, parser):
        parser.add_argument('frames', help='Directory of frames (or a dataset with an input/ directory)')
        parser.add_argument('--checkpoint', required=True, help='Checkpoint written by train')
        parser.add_argument('--output', required=True, help='Run output directory')
        parser.add_argument('--pattern', default='*.png', help='Frame filename glob (default: *.png)')
        parser.add_argument('--max-side', type=int, default=None, help='Downsample so max(width, height) <= N')
        parser.add_argument('--online-iterations', type=int, default=None,
                            help="Adam steps per stream (default: the checkpoint's)")
        parser.add_argument('--online-stream', type=int, default=None,
                            help="Frames per stream (default: the checkpoint's)")
        self.add_common_arguments(parser)

    def run(self, *args, **options):
        config = RunConfigLoader().load(options['config_path'], {
            'seed': options['seed'], 'threads': options['threads'],
        })
        frames_dir = self.require_directory(options['frames'], 'Frame directory')
        output = self.require_output_directory(options['output'])
        checkpoint_path = self.require_file(options['checkpoint'], 'Checkpoint')

        checkpoint = load_checkpoint(checkpoint_path)
        overrides = {
            'online_iterations': options['online_iterations'],
            'online_stream': options['online_stream'],
            'seed': options['seed'],
        }
        train_config = replace(checkpoint.train_config,
                               **{key: value for key, value in overrides.items() if value is not None})

        sequence = load_sequence(dataset_input_dir(frames_dir), options['pattern'], options['max_side'],
                                 config['threads'])
        check_same_shape('frame shape', (checkpoint.height, checkpoint.width, checkpoint.channels),
                         (sequence.height, sequence.width, sequence.channels))
        invariant_frames = InvariantTransformer.psi_sequence(sequence, checkpoint.invariant_model, config['threads'])

        result = DecompositionService(train_config).train_online(
            checkpoint.net1, checkpoint.net2, sequence, invariant_frames,
            checkpoint.warm_start, checkpoint.threshold_state)
        write_decompositions(output, result.decompositions, invariant_frames,
                             sequence.width, sequence.height, sequence.channels)

        manifest = RunManifest('decompose', {**train_config.to_dict(), 'threads': config['threads']})
        manifest.update({
            'checkpoint': str(checkpoint_path),
            'invariant_model': checkpoint.invariant_model.to_dict(),
            'frame_ids': sequence.frame_ids,
            'frame_shape': [sequence.width, sequence.height, sequence.channels],
            'sigma': result.sigma,
            'streams': result.streams,
            'threshold': result.threshold,
            'checksums': {'net1': result.net1.checksum(), 'net2': result.net2.checksum()},
        })
        manifest.write(output / 'manifest.json')

        u1, u2 = result.last_latents
        save_checkpoint(replace(checkpoint, train_config=train_config, last_u1=u1, last_u2=u2,
                                threshold_state=result.threshold_state), output / 'checkpoint.json')
        self.success(f"Decomposed {len(sequence)} frames into {output}")
