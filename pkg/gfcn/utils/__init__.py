from .network_utils import gfcn_forward, gfcn_backward, init_params
from .adam_utils import adam_step

__all__ = [
    'gfcn_forward',
    'gfcn_backward',
    'init_params',
    'adam_step',
]
