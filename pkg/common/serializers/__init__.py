from .run_config_serializer import RunConfigSerializer

__all__ = [
    'RunConfigSerializer'
]
