from .synth_config_serializer import SynthConfigSerializer, SynthObjectSerializer, IlluminationEventSerializer

__all__ = [
    'SynthConfigSerializer',
    'SynthObjectSerializer',
    'IlluminationEventSerializer'
]
