from .loss_utils import (
    LossCalculator,
    compute_prior_map,
    loss_reconst,
    loss_decomp,
    loss_reg,
    total_loss,
)
from .objective_utils import DecompositionObjective, ObjectiveResult
from .threshold_utils import threshold_foreground, foreground_masks, T_FLOOR
from .checkpoint_utils import save_checkpoint, load_checkpoint
from .output_utils import write_decompositions
from .run_utils import dataset_input_dir, build_invariant_model, mask_sequence

__all__ = [
    'LossCalculator',
    'compute_prior_map',
    'loss_reconst',
    'loss_decomp',
    'loss_reg',
    'total_loss',
    'DecompositionObjective',
    'ObjectiveResult',
    'threshold_foreground',
    'foreground_masks',
    'T_FLOOR',
    'save_checkpoint',
    'load_checkpoint',
    'write_decompositions',
    'dataset_input_dir',
    'build_invariant_model',
    'mask_sequence'
]
