from .exceptions_utils import (
    NumodError,
    SequenceLoadError,
    ImageWriteError,
    InvariantError,
    DimensionMismatchError,
    TrainingDivergedError,
    CheckpointError,
    NoEvaluableFramesError,
    FrameAlignmentError,
    SynthConfigError,
    check_same_shape,
)
from .manifest_utils import RunManifest, write_json, array_checksum
from .config_utils import RunConfigLoader
from .command_utils import PipelineCommand, EXIT_RUNTIME_FAILURE, EXIT_USAGE_ERROR

__all__ = [
    'NumodError',
    'SequenceLoadError',
    'ImageWriteError',
    'InvariantError',
    'DimensionMismatchError',
    'TrainingDivergedError',
    'CheckpointError',
    'NoEvaluableFramesError',
    'FrameAlignmentError',
    'SynthConfigError',
    'check_same_shape',
    'RunManifest',
    'write_json',
    'array_checksum',
    'RunConfigLoader',
    'PipelineCommand',
    'EXIT_RUNTIME_FAILURE',
    'EXIT_USAGE_ERROR',
]
