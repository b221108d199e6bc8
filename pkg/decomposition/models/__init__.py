from .frame_variables_model import FrameVariables
from .prior_map_model import PriorMap
from .decomposition_model import Decomposition
from .threshold_state_model import ThresholdState
from .train_config_model import TrainConfig
from .checkpoint_model import ModelCheckpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION
from .training_result_model import TrainingResult

__all__ = [
    'FrameVariables',
    'PriorMap',
    'Decomposition',
    'ThresholdState',
    'TrainConfig',
    'ModelCheckpoint',
    'CHECKPOINT_FORMAT',
    'CHECKPOINT_VERSION',
    'TrainingResult'
]
