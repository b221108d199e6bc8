from .invariant_model_serializer import InvariantModelSerializer

__all__ = [
    'InvariantModelSerializer'
]
