from .network_state_serializer import FloatArrayField, AdamStateSerializer, NetworkStateSerializer

__all__ = [
    'FloatArrayField',
    'AdamStateSerializer',
    'NetworkStateSerializer'
]
