from .gfcn_params_model import GfcnParams, ForwardCache, PARAM_NAMES, WEIGHT_NAMES
from .adam_state_model import AdamState

__all__ = [
    'GfcnParams',
    'ForwardCache',
    'AdamState',
    'PARAM_NAMES',
    'WEIGHT_NAMES'
]
