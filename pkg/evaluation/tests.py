import csv
import json
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from common.utils import (
    NoEvaluableFramesError,
    FrameAlignmentError,
    DimensionMismatchError,
    EXIT_RUNTIME_FAILURE,
)
from sequence.models import MaskSequence
from sequence.utils import save_sequence
from .models import FrameScore
from .utils import MetricsCalculator, confusion, f_measure_sequence, evaluate_masks


def masks_of(*rows, width=2, height=2, prefix='gt'):
    return MaskSequence(masks=[np.asarray(row) for row in rows],
                        frame_ids=[f"{prefix}{k:06d}" for k in range(1, len(rows) + 1)],
                        width=width, height=height)


class ConfusionTest(SimpleTestCase):

    def test_counts(self):
        score = confusion(np.array([1, 1, 0, 0]), np.array([1, 0, 1, 0]))
        self.assertEqual((score.tp, score.fp, score.fn, score.tn), (1, 1, 1, 1))

    def test_roi_excludes_pixels(self):
        score = confusion(np.array([1, 1, 0, 0]), np.array([1, 0, 1, 0]), roi=np.array([1, 0, 1, 1]))
        self.assertEqual((score.tp, score.fp, score.fn, score.tn), (1, 0, 1, 1))
        self.assertEqual(score.evaluated, 3)

    def test_matches_pixel_loop(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pred = rng.integers(0, 2, size=256)
            gt = rng.integers(0, 2, size=256)
            roi = rng.random(256) < 0.8
            expected = [0, 0, 0, 0]
            for p, g, r in zip(pred, gt, roi):
                if not r:
                    continue
                if p and g:
                    expected[0] += 1
                elif p:
                    expected[1] += 1
                elif g:
                    expected[2] += 1
                else:
                    expected[3] += 1
            score = confusion(pred, gt, roi)
            self.assertEqual([score.tp, score.fp, score.fn, score.tn], expected)

    def test_swapping_masks_swaps_errors(self):
        rng = np.random.default_rng(1)
        pred, gt = rng.integers(0, 2, size=64), rng.integers(0, 2, size=64)
        forward, backward = confusion(pred, gt), confusion(gt, pred)
        self.assertEqual((forward.fp, forward.fn), (backward.fn, backward.fp))
        self.assertEqual((forward.tp, forward.tn), (backward.tp, backward.tn))

    def test_size_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            confusion(np.zeros(4), np.zeros(5))


class FMeasureTest(SimpleTestCase):

    def test_perfect_frame(self):
        score = FrameScore(frame_id='a', tp=10, fp=0, fn=0, tn=90)
        self.assertEqual(score.f_measure, 1.0)

    def test_half(self):
        score = FrameScore(frame_id='a', tp=5, fp=5, fn=5, tn=85)
        self.assertEqual(score.precision, 0.5)
        self.assertEqual(score.recall, 0.5)
        self.assertEqual(score.f_measure, 0.5)

    def test_sequence_mean(self):
        scores = [FrameScore('a', 10, 0, 0, 90), FrameScore('b', 5, 5, 5, 85), FrameScore('c', 0, 0, 0, 100)]
        self.assertAlmostEqual(f_measure_sequence(scores[:2]), 0.75, places=15)
        self.assertAlmostEqual(f_measure_sequence(scores[:2] + [FrameScore('d', 3, 2, 2, 93)]), 0.7, places=12)
        self.assertAlmostEqual(f_measure_sequence(scores), 0.75, places=15)

    def test_empty_frame_has_no_f_measure(self):
        score = FrameScore(frame_id='empty', tp=0, fp=0, fn=0, tn=100)
        self.assertFalse(score.defined)
        self.assertIsNone(score.f_measure)
        self.assertIsNone(score.precision)

    def test_prediction_on_empty_ground_truth_scores_zero(self):
        score = FrameScore(frame_id='spurious', tp=0, fp=3, fn=0, tn=97)
        self.assertTrue(score.defined)
        self.assertIsNone(score.recall)
        self.assertEqual(score.f_measure, 0.0)

    def test_no_evaluable_frames(self):
        with self.assertRaises(NoEvaluableFramesError):
            f_measure_sequence([FrameScore('a', 0, 0, 0, 4), FrameScore('b', 0, 0, 0, 4)])

    def test_masks_against_themselves(self):
        rng = np.random.default_rng(2)
        rows = [rng.integers(0, 2, size=16) for _ in range(5)]
        rows[0][0] = 1
        masks = masks_of(*rows, width=4, height=4)
        _, summary = evaluate_masks(masks, masks)
        self.assertEqual(summary['f_measure'], 1.0)
        self.assertEqual(summary['fp'] + summary['fn'], 0)

    def test_counts_are_validated(self):
        with self.assertRaises(ValidationError):
            FrameScore(frame_id='bad', tp=-1, fp=0, fn=0, tn=0)


class AlignmentTest(SimpleTestCase):

    def test_same_names(self):
        self.assertEqual(MetricsCalculator.align(['b', 'a'], ['a', 'b']), [(1, 0), (0, 1)])

    def test_trailing_numbers(self):
        pairs = MetricsCalculator.align(['in000001', 'in000002'], ['gt000002', 'gt000001'])
        self.assertEqual(pairs, [(1, 0), (0, 1)])
        self.assertEqual(MetricsCalculator.frame_key('bin000123'), '123')

    def test_unmatched_frames_are_reported(self):
        with self.assertRaises(FrameAlignmentError) as raised:
            MetricsCalculator.align(['in000001', 'in000002'], ['gt000001', 'gt000003'])
        self.assertIn('gt000003', raised.exception.message)
        self.assertIn('in000002', raised.exception.message)

    def test_duplicate_frame_numbers_are_rejected(self):
        with self.assertRaises(FrameAlignmentError) as raised:
            MetricsCalculator.align(['in000012', 'frame12', 'in000013'], ['gt000012', 'gt000013'])
        self.assertIn('in000012/frame12', raised.exception.message)
        with self.assertRaises(FrameAlignmentError):
            MetricsCalculator.align(['in000001'], ['gt000001', 'groundtruth1'], intersect=True)

    def test_duplicate_masks_are_not_scored(self):
        pred = MaskSequence(masks=[np.array([1, 0, 0, 0]), np.array([0, 0, 0, 1])],
                            frame_ids=['in000012', 'frame12'], width=2, height=2)
        gt = MaskSequence(masks=[np.array([1, 0, 0, 0])], frame_ids=['gt000012'], width=2, height=2)
        with self.assertRaises(FrameAlignmentError):
            evaluate_masks(pred, gt)

    def test_intersect_scores_shared_frames(self):
        pred = masks_of([1, 0, 0, 0], [0, 1, 0, 0], prefix='in')
        gt = MaskSequence(masks=[np.array([0, 1, 0, 0]), np.array([1, 1, 1, 1])],
                          frame_ids=['gt000002', 'gt000009'], width=2, height=2)
        scores, summary = evaluate_masks(pred, gt, intersect=True)
        self.assertEqual([s.frame_id for s in scores], ['gt000002'])
        self.assertEqual(summary['f_measure'], 1.0)

    def test_roi_from_ground_truth(self):
        pred = masks_of([1, 1, 1, 1], prefix='in')
        gt = MaskSequence(masks=[np.array([1, 0, 0, 0])], frame_ids=['gt000001'], width=2, height=2,
                          roi=[np.array([1, 0, 0, 0])])
        scores, _ = evaluate_masks(pred, gt)
        self.assertEqual((scores[0].tp, scores[0].fp, scores[0].evaluated), (1, 0, 1))


class EvalCommandTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, name, masks, ids):
        save_sequence([np.asarray(m, dtype=np.float64) for m in masks], ids, 2, 2, 1, self.root / name)
        return self.root / name

    def test_writes_scores_and_summary(self):
        pred = self._write('pred', [[1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0]], ['in000001', 'in000002', 'in000003'])
        gt = self._write('gt', [[1, 0, 0, 0], [1, 0, 1, 0], [0, 0, 0, 0]], ['gt000001', 'gt000002', 'gt000003'])
        output = self.root / 'report'
        call_command('eval', str(pred), str(gt), output=str(output))

        with (output / 'scores.csv').open() as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual([row['frame_id'] for row in rows], ['gt000001', 'gt000002', 'gt000003'])
        self.assertEqual(float(rows[1]['f_measure']), 0.5)
        self.assertEqual(rows[2]['f_measure'], '')
        summary = json.loads((output / 'summary.json').read_text())
        self.assertEqual(summary['f_measure'], 0.75)
        self.assertEqual(summary['skipped_frames'], ['gt000003'])

    def test_cdnet_shades(self):
        pred = self._write('pred', [[1, 1, 1, 0]], ['in000001'])
        gt_dir = self.root / 'gt'
        # 255 motion, 170 unknown, 85 outside roi, 0 static
        save_sequence([np.array([1.0, 170 / 255, 85 / 255, 0.0])], ['gt000001'], 2, 2, 1, gt_dir)
        output = self.root / 'report'
        call_command('eval', str(pred), str(gt_dir), output=str(output), exclude_unknown=True)
        summary = json.loads((output / 'summary.json').read_text())
        self.assertEqual((summary['tp'], summary['fp'], summary['tn']), (1, 0, 1))

    def test_misaligned_frames_fail(self):
        pred = self._write('pred', [[1, 0, 0, 0]], ['in000001'])
        gt = self._write('gt', [[1, 0, 0, 0]], ['gt000005'])
        with self.assertRaises(CommandError) as raised:
            call_command('eval', str(pred), str(gt), output=str(self.root / 'report'))
        self.assertEqual(raised.exception.returncode, EXIT_RUNTIME_FAILURE)

    def test_all_empty_frames_fail(self):
        pred = self._write('pred', [[0, 0, 0, 0]], ['in000001'])
        gt = self._write('gt', [[0, 0, 0, 0]], ['gt000001'])
        with self.assertRaises(CommandError) as raised:
            call_command('eval', str(pred), str(gt), output=str(self.root / 'report'))
        self.assertEqual(raised.exception.returncode, EXIT_RUNTIME_FAILURE)
