from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.core.exceptions import ValidationError

from gfcn.models import GfcnParams, AdamState
from invariant.models import InvariantModel
from .threshold_state_model import ThresholdState
from .train_config_model import TrainConfig

CHECKPOINT_FORMAT = 'numod-checkpoint'
CHECKPOINT_VERSION = 1


@dataclass(eq=False)
class ModelCheckpoint:
    """
    Everything needed to continue decomposing frames of one scene: both
    networks with their Adam states, the settings that produced them, the
    latest latent codes (online warm start) and the running threshold
    statistics
    """
    width: int
    height: int
    channels: int
    net1: GfcnParams
    net2: GfcnParams
    train_config: TrainConfig
    invariant_model: InvariantModel
    net1_adam: Optional[AdamState] = None
    net2_adam: Optional[AdamState] = None
    last_u1: Optional[np.ndarray] = None
    last_u2: Optional[np.ndarray] = None
    threshold_state: ThresholdState = field(default_factory=ThresholdState)

    def __post_init__(self):
        pixels = self.width * self.height
        if self.net1.output_dim != pixels * self.channels:
            raise ValidationError(
                f"Background network outputs {self.net1.output_dim} values, "
                f"frames have {pixels * self.channels}"
            )
        if self.net2.output_dim != pixels:
            raise ValidationError(
                f"Invariant network outputs {self.net2.output_dim} values, frames have {pixels} pixels"
            )
        if self.net1.latent_dim != self.net2.latent_dim:
            raise ValidationError("Both networks need the same latent size")
        for name in ('last_u1', 'last_u2'):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=np.float64).reshape(-1)
                if value.size != self.net1.latent_dim:
                    raise ValidationError(f"{name} has {value.size} values, latent size is {self.net1.latent_dim}")
                setattr(self, name, value)

    @property
    def warm_start(self):
        if self.last_u1 is None or self.last_u2 is None:
            return None
        return self.last_u1, self.last_u2
