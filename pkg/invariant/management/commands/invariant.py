import logging

from common.utils import PipelineCommand, RunConfigLoader, RunManifest, array_checksum
from sequence.utils import load_sequence, save_sequence
from ...models import InvariantModel
from ...utils import InvariantTransformer, invariant_matrix

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Compute illumination invariant images of a frame sequence'

    def add_arguments(self, parser):
        parser.add_argument('frames', help='Directory of input frames')
        parser.add_argument('--output', required=True, help='Directory for the invariant images')
        parser.add_argument('--pattern', default='*.png', help='Frame filename glob (default: *.png)')
        parser.add_argument('--max-side', type=int, default=None, help='Downsample so max(width, height) <= N')
        parser.add_argument('--angle', type=float, default=None, dest='theta',
                            help='Illumination direction in radians, [0, pi); calibrated when omitted')
        parser.add_argument('--window', type=int, default=None, dest='wiener_window', help='Wiener window (odd)')
        parser.add_argument('--noise', type=float, default=None, dest='wiener_noise',
                            help='Wiener noise variance; estimated per frame when omitted')
        parser.add_argument('--n-angles', type=int, default=None, dest='n_angles',
                            help='Candidate angles for calibration')
        parser.add_argument('--epsilon-log', type=float, default=None, dest='epsilon_log',
                            help='Floor added before logarithms')
        self.add_common_arguments(parser)

    def run(self, *args, **options):
        config = RunConfigLoader().load(options['config_path'], {
            key: options[key] for key in ('theta', 'wiener_window', 'wiener_noise', 'n_angles',
                                          'epsilon_log', 'seed', 'threads')
        })
        frames_dir = self.require_directory(options['frames'], 'Frame directory')
        output = self.require_output_directory(options['output'])

        sequence = load_sequence(frames_dir, options['pattern'], options['max_side'], config['threads'])
        theta = config['theta']
        if theta is None:
            theta = (InvariantTransformer.calibrate_direction(sequence, config['n_angles'], config['epsilon_log'])
                     if sequence.channels == 3 else 0.0)
        model = InvariantModel(theta=theta, wiener_window=config['wiener_window'],
                               wiener_noise=config['wiener_noise'], epsilon_log=config['epsilon_log'])

        invariant_frames = InvariantTransformer.psi_sequence(sequence, model, config['threads'])
        stack = invariant_matrix(invariant_frames)
        save_sequence(stack, sequence.frame_ids, sequence.width, sequence.height, 1, output)

        manifest = RunManifest('invariant', config)
        manifest.update({
            'invariant_model': model.to_dict(),
            'frame_ids': sequence.frame_ids,
            'frame_shape': [sequence.width, sequence.height, sequence.channels],
            'sigma': stack.std(axis=1),
            'checksum': array_checksum(stack),
        })
        manifest.write(output / 'invariant.json')
        self.success(f"Wrote {len(sequence)} invariant images to {output} (theta={theta:.4f})")
