import logging
import math

from django.core.exceptions import ValidationError

from common.utils import PipelineCommand, RunConfigLoader, RunManifest, check_same_shape
from evaluation.utils import MetricsCalculator, evaluate_masks, write_report
from invariant.utils import InvariantTransformer
from sequence.utils import load_sequence, load_masks
from ...decomposition_service import DecompositionService
from ...models import ModelCheckpoint, TrainConfig
from ...utils import (
    build_invariant_model,
    dataset_input_dir,
    load_checkpoint,
    mask_sequence,
    save_checkpoint,
    write_decompositions,
)

logger = logging.getLogger(__name__)

# Options overriding the run config key of the same name
TRAINING_OPTIONS = (
    'mode', 'epochs', 'learning_rate', 'latent_dim', 'weight_decay', 'minibatch_frames',
    'online_iterations', 'online_stream', 'pretrain_fraction', 'threshold_factor', 'prior_mode',
    'theta', 'wiener_window', 'wiener_noise', 'n_angles', 'epsilon_log', 'seed', 'threads',
)


class Command(PipelineCommand):
    help = ('Decompose a sequence into background, illumination and foreground (batch or online) '
            'and write masks, decomposition images, a manifest and a checkpoint')

    def add_arguments(self, parser):
        parser.add_argument('dataset', help='Dataset directory (frames in <dataset>/input or the directory itself)')
        parser.add_argument('--output', required=True, help='Run output directory')
        parser.add_argument('--mode', choices=['batch', 'online'], default=None, help='Training mode (default: batch)')
        parser.add_argument('--checkpoint', default=None,
                            help='Online mode: continue from this checkpoint instead of pretraining')
        parser.add_argument('--evaluate', action='store_true',
                            help='Score the masks against <dataset>/groundtruth and add the result to the manifest')
        parser.add_argument('--pattern', default='*.png', help='Frame filename glob (default: *.png)')
        parser.add_argument('--gt-pattern', default='*.png', help='Ground-truth filename glob (default: *.png)')
        parser.add_argument('--exclude-unknown', action='store_true',
                            help='Leave CDnet unknown (170) and outside-ROI (85) pixels out of scoring')
        parser.add_argument('--max-side', type=int, default=None, help='Downsample so max(width, height) <= N')

        training = parser.add_argument_group('training')
        training.add_argument('--epochs', type=int, default=None)
        training.add_argument('--learning-rate', type=float, default=None)
        training.add_argument('--latent-dim', type=int, default=None)
        training.add_argument('--weight-decay', type=float, default=None)
        training.add_argument('--minibatch', type=int, default=None, dest='minibatch_frames',
                              help='Frames per minibatch (0: whole sequence up to 256 frames, else 64)')
        training.add_argument('--online-iterations', type=int, default=None)
        training.add_argument('--online-stream', type=int, default=None)
        training.add_argument('--pretrain-fraction', type=float, default=None)
        training.add_argument('--threshold-factor', type=float, default=None)
        training.add_argument('--prior-mode', choices=['sigmoid', 'shifted'], default=None)

        invariant = parser.add_argument_group('invariant representation')
        invariant.add_argument('--angle', type=float, default=None, dest='theta',
                               help='Illumination direction in radians; calibrated when omitted')
        invariant.add_argument('--window', type=int, default=None, dest='wiener_window')
        invariant.add_argument('--noise', type=float, default=None, dest='wiener_noise')
        invariant.add_argument('--n-angles', type=int, default=None)
        invariant.add_argument('--epsilon-log', type=float, default=None)
        self.add_common_arguments(parser)

    def _validate_inputs(self, options, config):
        dataset = self.require_directory(options['dataset'], 'Dataset')
        output = self.require_output_directory(options['output'])
        checkpoint_path = options['checkpoint']
        if checkpoint_path:
            if config['mode'] != 'online':
                raise ValidationError('--checkpoint applies to online mode only')
            self.require_file(checkpoint_path, 'Checkpoint')
        gt_dir = None
        if options['evaluate']:
            gt_dir = self.require_directory(dataset / 'groundtruth', 'Ground-truth directory')
        return dataset, output, gt_dir

    @staticmethod
    def _load_ground_truth(gt_dir, sequence, options, threads):
        """Masks that pair one to one with the input frames, checked before anything is written"""
        ground_truth = load_masks(gt_dir, options['gt_pattern'], options['max_side'],
                                  exclude_unknown=options['exclude_unknown'], threads=threads)
        check_same_shape('ground-truth mask size', (sequence.height, sequence.width),
                         (ground_truth.height, ground_truth.width))
        MetricsCalculator.align(sequence.frame_ids, ground_truth.frame_ids)
        return ground_truth

    def run(self, *args, **options):
        config = RunConfigLoader().load(options['config_path'], {key: options[key] for key in TRAINING_OPTIONS})
        dataset, output, gt_dir = self._validate_inputs(options, config)
        train_config = TrainConfig.from_dict(config)
        threads = config['threads']

        sequence = load_sequence(dataset_input_dir(dataset), options['pattern'], options['max_side'], threads)
        checkpoint = load_checkpoint(options['checkpoint']) if options['checkpoint'] else None
        ground_truth = self._load_ground_truth(gt_dir, sequence, options, threads) if gt_dir else None

        pretrain_count = 0
        if config['mode'] == 'online' and checkpoint is None:
            pretrain_count = int(math.floor(len(sequence) * train_config.pretrain_fraction))
            if not 1 <= pretrain_count < len(sequence):
                raise ValidationError(
                    f"Online mode splits {len(sequence)} frames into {pretrain_count} pretraining frames "
                    f"and the rest; both parts need at least one frame"
                )

        if checkpoint is not None:
            check_same_shape('frame shape', (checkpoint.height, checkpoint.width, checkpoint.channels),
                             (sequence.height, sequence.width, sequence.channels))
            invariant_model = checkpoint.invariant_model
        else:
            invariant_model = build_invariant_model(sequence, config)
        invariant_frames = InvariantTransformer.psi_sequence(sequence, invariant_model, threads)

        service = DecompositionService(train_config)
        manifest = RunManifest('train', config)
        manifest.update({
            'invariant_model': invariant_model.to_dict(),
            'frame_ids': sequence.frame_ids,
            'frame_shape': [sequence.width, sequence.height, sequence.channels],
        })

        streamed_ids = []
        if config['mode'] == 'batch':
            result = service.train_batch(sequence, invariant_frames)
            decompositions = result.decompositions
            final = result
            manifest.update({
                'sigma': result.sigma,
                'loss_history': result.loss_history,
                'initial_loss': result.initial_loss,
                'final_loss': result.final_loss,
                'threshold': result.threshold,
            })
        else:
            if checkpoint is not None:
                net1, net2 = checkpoint.net1, checkpoint.net2
                adams = checkpoint.net1_adam, checkpoint.net2_adam
                warm_start, state = checkpoint.warm_start, checkpoint.threshold_state
                stream_sequence, stream_invariants = sequence, invariant_frames
                decompositions = []
            else:
                pretrain = service.train_batch(sequence.subset(0, pretrain_count), invariant_frames[:pretrain_count])
                net1, net2 = pretrain.net1, pretrain.net2
                adams = pretrain.net1_adam, pretrain.net2_adam
                warm_start, state = pretrain.last_latents, pretrain.threshold_state
                stream_sequence = sequence.subset(pretrain_count, len(sequence))
                stream_invariants = invariant_frames[pretrain_count:]
                decompositions = list(pretrain.decompositions)
                manifest.set('pretrain', {
                    'frames': pretrain_count,
                    'sigma': pretrain.sigma,
                    'loss_history': pretrain.loss_history,
                    'initial_loss': pretrain.initial_loss,
                    'final_loss': pretrain.final_loss,
                    'threshold': pretrain.threshold,
                })

            checksums_before = [net1.checksum(), net2.checksum()]
            final = service.train_online(net1, net2, stream_sequence, stream_invariants, warm_start, state)
            final.net1_adam, final.net2_adam = adams
            decompositions += final.decompositions
            streamed_ids = stream_sequence.frame_ids
            manifest.set('online', {
                'frames': len(stream_sequence),
                'sigma': final.sigma,
                'streams': final.streams,
                'threshold': final.threshold,
                'weights_unchanged': checksums_before == [final.net1.checksum(), final.net2.checksum()],
            })

        write_decompositions(output, decompositions, invariant_frames,
                             sequence.width, sequence.height, sequence.channels)
        manifest.set('checksums', {'net1': final.net1.checksum(), 'net2': final.net2.checksum()})

        if ground_truth is not None:
            predicted = mask_sequence(decompositions, sequence.width, sequence.height)
            scores, summary = evaluate_masks(predicted, ground_truth)
            write_report(scores, summary, output / 'evaluation')
            manifest.set('evaluation', summary)
            if streamed_ids:
                streamed = mask_sequence(decompositions[-len(streamed_ids):], sequence.width, sequence.height)
                manifest.set('evaluation_streamed', evaluate_masks(streamed, ground_truth, intersect=True)[1])

        save_checkpoint(ModelCheckpoint(
            width=sequence.width,
            height=sequence.height,
            channels=sequence.channels,
            net1=final.net1,
            net2=final.net2,
            net1_adam=final.net1_adam,
            net2_adam=final.net2_adam,
            train_config=train_config,
            invariant_model=invariant_model,
            last_u1=final.last_latents[0],
            last_u2=final.last_latents[1],
            threshold_state=final.threshold_state,
        ), output / 'checkpoint.json')
        manifest.write(output / 'manifest.json')

        self.success(f"Decomposed {len(decompositions)} frames ({config['mode']}) into {output}")
