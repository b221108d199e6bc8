"""
Helpers shared by the train and decompose commands
"""
import logging
from pathlib import Path
from typing import Any, Dict, List

from invariant.models import InvariantModel
from invariant.utils import InvariantTransformer
from sequence.models import Sequence, MaskSequence
from ..models import Decomposition

logger = logging.getLogger(__name__)


def dataset_input_dir(dataset) -> Path:
    """<dataset>/input when present, else the dataset directory itself"""
    dataset = Path(dataset)
    return dataset / 'input' if (dataset / 'input').is_dir() else dataset


def build_invariant_model(sequence: Sequence, config: Dict[str, Any]) -> InvariantModel:
    """
    Invariant settings for a run; the direction is calibrated on the
    sequence unless config fixes theta (grayscale sequences use 0)
    """
    theta = config.get('theta')
    if theta is None:
        theta = 0.0
        if sequence.channels == 3:
            theta = InvariantTransformer.calibrate_direction(sequence, config['n_angles'], config['epsilon_log'])
    return InvariantModel(
        theta=theta,
        wiener_window=config['wiener_window'],
        wiener_noise=config.get('wiener_noise'),
        epsilon_log=config['epsilon_log'],
    )


def mask_sequence(decompositions: List[Decomposition], width: int, height: int) -> MaskSequence:
    return MaskSequence(
        masks=[d.mask for d in decompositions],
        frame_ids=[d.frame_id for d in decompositions],
        width=width,
        height=height,
    )
