from .invariant_utils import (
    InvariantTransformer,
    log_chromaticity,
    calibrate_direction,
    project_invariant,
    wiener_reflectance,
    psi,
    invariant_matrix,
    noise_level,
)

__all__ = [
    'InvariantTransformer',
    'log_chromaticity',
    'calibrate_direction',
    'project_invariant',
    'wiener_reflectance',
    'psi',
    'invariant_matrix',
    'noise_level',
]
