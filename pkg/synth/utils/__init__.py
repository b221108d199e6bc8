from .generator_utils import (
    SequenceSynthesizer,
    generate,
    standard_fixture_config,
    minimal_config,
    PRESETS,
)

__all__ = [
    'SequenceSynthesizer',
    'generate',
    'standard_fixture_config',
    'minimal_config',
    'PRESETS',
]
