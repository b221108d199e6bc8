"""
Per-frame confusion counts and the frame-averaged F-measure
"""
import csv
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from common.utils import (
    NoEvaluableFramesError,
    FrameAlignmentError,
    check_same_shape,
    write_json,
)
from sequence.models import MaskSequence
from ..models import FrameScore

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['frame_id', 'tp', 'fp', 'fn', 'tn', 'precision', 'recall', 'f_measure']
_NUMBER = re.compile(r'(\d+)$')


def _listing(ids: List[str], limit: int = 10) -> str:
    if not ids:
        return 'none'
    shown = ', '.join(ids[:limit])
    return shown if len(ids) <= limit else f"{shown} (+{len(ids) - limit} more)"


class MetricsCalculator:
    """
    Scores predicted masks against ground truth
    """

    @staticmethod
    def confusion(pred_mask: np.ndarray, gt_mask: np.ndarray, roi: Optional[np.ndarray] = None,
                  frame_id: str = '') -> FrameScore:
        """
        Confusion counts over the roi pixels (all pixels when roi is None)

        Raises:
            DimensionMismatchError: the masks or roi differ in size
        """
        pred = np.asarray(pred_mask).reshape(-1) != 0
        gt = np.asarray(gt_mask).reshape(-1) != 0
        check_same_shape(f"masks of frame {frame_id}", gt.shape, pred.shape)
        if roi is not None:
            region = np.asarray(roi, dtype=bool).reshape(-1)
            check_same_shape(f"roi of frame {frame_id}", gt.shape, region.shape)
            pred, gt = pred[region], gt[region]
        return FrameScore(
            frame_id=frame_id,
            tp=int(np.count_nonzero(pred & gt)),
            fp=int(np.count_nonzero(pred & ~gt)),
            fn=int(np.count_nonzero(~pred & gt)),
            tn=int(np.count_nonzero(~pred & ~gt)),
        )

    @staticmethod
    def f_measure_sequence(scores: List[FrameScore]) -> float:
        """
        Mean per-frame F-measure over frames where it is defined

        Raises:
            NoEvaluableFramesError: every frame is empty in both masks
        """
        values = [score.f_measure for score in scores if score.defined]
        if not values:
            raise NoEvaluableFramesError(
                f"None of {len(scores)} frames has foreground in either mask",
                details={'frames': len(scores)}
            )
        return float(np.mean(values))

    @staticmethod
    def frame_key(frame_id: str) -> str:
        """Trailing frame number of an id ('in000123' -> '123'), else the id itself"""
        match = _NUMBER.search(frame_id)
        return str(int(match.group(1))) if match else frame_id

    @staticmethod
    def _check_unique(side: str, ids: List[str], keys: List[str]) -> None:
        first: Dict[str, str] = {}
        clashes = []
        for frame_id, key in zip(ids, keys):
            if key in first:
                clashes.append(f"{first[key]}/{frame_id}")
            else:
                first[key] = frame_id
        if clashes:
            raise FrameAlignmentError(
                f"{len(clashes)} {side} frame(s) share a frame key with an earlier one: {_listing(clashes)}",
                details={'side': side, 'duplicates': clashes}
            )

    @staticmethod
    def align(pred_ids: List[str], gt_ids: List[str], intersect: bool = False) -> List[Tuple[int, int]]:
        """
        Pair prediction and ground-truth frames

        Ids match by name when the sets agree, otherwise by trailing frame
        number. With intersect only shared ids are paired; without it any
        unmatched id is an error. Two ids of one side mapping to the same
        key (e.g. 'in000012' and 'frame12') are always an error.

        Returns:
            list of (pred index, gt index) in ground-truth order
        """
        if set(pred_ids) & set(gt_ids):
            pred_keys, gt_keys = list(pred_ids), list(gt_ids)
        else:
            pred_keys = [MetricsCalculator.frame_key(i) for i in pred_ids]
            gt_keys = [MetricsCalculator.frame_key(i) for i in gt_ids]
        MetricsCalculator._check_unique('prediction', pred_ids, pred_keys)
        MetricsCalculator._check_unique('ground-truth', gt_ids, gt_keys)

        pred_index: Dict[str, int] = {key: k for k, key in enumerate(pred_keys)}
        gt_index: Dict[str, int] = {key: k for k, key in enumerate(gt_keys)}
        missing_pred = [gt_ids[k] for k, key in enumerate(gt_keys) if key not in pred_index]
        missing_gt = [pred_ids[k] for k, key in enumerate(pred_keys) if key not in gt_index]

        if (missing_pred or missing_gt) and not intersect:
            raise FrameAlignmentError(
                f"Frame sets differ: {len(missing_pred)} ground-truth frame(s) without prediction, "
                f"{len(missing_gt)} prediction(s) without ground truth; "
                f"unmatched ground truth: {_listing(missing_pred)}; unmatched predictions: {_listing(missing_gt)}",
                details={'missing_prediction': missing_pred, 'missing_ground_truth': missing_gt}
            )
        pairs = [(pred_index[key], k) for k, key in enumerate(gt_keys) if key in pred_index]
        if not pairs:
            raise FrameAlignmentError("Prediction and ground truth share no frames")
        if missing_pred or missing_gt:
            logger.warning(f"Scoring {len(pairs)} shared frames; {len(missing_pred) + len(missing_gt)} unmatched")
        return pairs

    @staticmethod
    def score_masks(pred: MaskSequence, gt: MaskSequence, intersect: bool = False) -> List[FrameScore]:
        """Confusion counts of every aligned frame, using the ground truth's roi"""
        check_same_shape('mask size', (gt.height, gt.width), (pred.height, pred.width))
        return [
            MetricsCalculator.confusion(pred.masks[p], gt.masks[g], gt.roi_for(g), frame_id=gt.frame_ids[g])
            for p, g in MetricsCalculator.align(pred.frame_ids, gt.frame_ids, intersect)
        ]

    @staticmethod
    def summary(scores: List[FrameScore]) -> Dict:
        defined = [score for score in scores if score.defined]
        return {
            'f_measure': MetricsCalculator.f_measure_sequence(scores),
            'frames': len(scores),
            'evaluated_frames': len(defined),
            'skipped_frames': [score.frame_id for score in scores if not score.defined],
            'tp': sum(score.tp for score in scores),
            'fp': sum(score.fp for score in scores),
            'fn': sum(score.fn for score in scores),
            'tn': sum(score.tn for score in scores),
        }

    @staticmethod
    def write_csv(scores: List[FrameScore], path) -> Path:
        """One row per frame; undefined precision, recall or F are left empty"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for score in scores:
                writer.writerow([
                    score.frame_id, score.tp, score.fp, score.fn, score.tn,
                    *('' if value is None else repr(value)
                      for value in (score.precision, score.recall, score.f_measure)),
                ])
        return path


def confusion(pred_mask, gt_mask, roi=None, frame_id='') -> FrameScore:
    """Confusion counts of one frame"""
    return MetricsCalculator.confusion(pred_mask, gt_mask, roi, frame_id)


def f_measure_sequence(scores: List[FrameScore]) -> float:
    """Frame-averaged F-measure"""
    return MetricsCalculator.f_measure_sequence(scores)


def evaluate_masks(pred: MaskSequence, gt: MaskSequence, intersect: bool = False) -> Tuple[List[FrameScore], Dict]:
    """Scores and summary for a prediction against ground truth"""
    scores = MetricsCalculator.score_masks(pred, gt, intersect)
    summary = MetricsCalculator.summary(scores)
    logger.info(f"F-measure {summary['f_measure']:.4f} over {summary['evaluated_frames']} of {len(scores)} frames")
    return scores, summary


def write_report(scores: List[FrameScore], summary: Dict, output) -> Tuple[Path, Path]:
    """Write scores.csv and summary.json into output"""
    output = Path(output)
    csv_path = MetricsCalculator.write_csv(scores, output / 'scores.csv')
    json_path = output / 'summary.json'
    write_json(json_path, summary)
    return csv_path, json_path
