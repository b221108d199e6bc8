from .synth_config_model import SynthObject, IlluminationEvent, SynthConfig, BACKGROUNDS, EVENT_KINDS

__all__ = [
    'SynthObject',
    'IlluminationEvent',
    'SynthConfig',
    'BACKGROUNDS',
    'EVENT_KINDS'
]
