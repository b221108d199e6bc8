from .checkpoint_serializer import CheckpointSerializer, TrainConfigSerializer, ThresholdStateSerializer

__all__ = [
    'CheckpointSerializer',
    'TrainConfigSerializer',
    'ThresholdStateSerializer'
]
