import logging

from common.utils import PipelineCommand
from sequence.utils import load_masks
from ...utils import evaluate_masks, write_report

logger = logging.getLogger(__name__)


class Command(PipelineCommand):
    help = 'Score predicted masks against ground truth: per-frame CSV and a summary JSON with the F-measure'

    def add_arguments(self, parser):
        parser.add_argument('predictions', help='Directory of predicted masks')
        parser.add_argument('groundtruth', help='Directory of ground-truth masks')
        parser.add_argument('--output', required=True, help='Directory for scores.csv and summary.json')
        parser.add_argument('--pattern', default='*.png', help='Prediction filename glob (default: *.png)')
        parser.add_argument('--gt-pattern', default='*.png', help='Ground-truth filename glob (default: *.png)')
        parser.add_argument('--intersect', action='store_true',
                            help='Score only frames present in both directories')
        parser.add_argument('--exclude-unknown', action='store_true',
                            help='Leave CDnet unknown (170) and outside-ROI (85) pixels out of scoring')
        parser.add_argument('--roi', default=None, help='Static ROI image; zero pixels are not scored')
        parser.add_argument('--max-side', type=int, default=None,
                            help='Downsample both mask sets so max(width, height) <= N')

    def run(self, *args, **options):
        pred_dir = self.require_directory(options['predictions'], 'Prediction directory')
        gt_dir = self.require_directory(options['groundtruth'], 'Ground-truth directory')
        output = self.require_output_directory(options['output'])
        roi = self.require_file(options['roi'], 'ROI image') if options['roi'] else None

        predicted = load_masks(pred_dir, options['pattern'], options['max_side'])
        ground_truth = load_masks(gt_dir, options['gt_pattern'], options['max_side'],
                                  exclude_unknown=options['exclude_unknown'], roi_path=roi)
        scores, summary = evaluate_masks(predicted, ground_truth, intersect=options['intersect'])
        csv_path, json_path = write_report(scores, summary, output)
        self.success(f"F-measure {summary['f_measure']:.4f} over {summary['evaluated_frames']} frames "
                     f"({csv_path.name}, {json_path.name})")
