from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from gfcn.models import GfcnParams, AdamState
from .decomposition_model import Decomposition
from .frame_variables_model import FrameVariables
from .threshold_state_model import ThresholdState


@dataclass(eq=False)
class TrainingResult:
    """
    Output of batch training or online fitting over a run of frames

    loss_history holds the full objective after every epoch (batch) or the
    final objective of every stream (online). streams is empty in batch
    mode.
    """
    net1: GfcnParams
    net2: GfcnParams
    variables: List[FrameVariables]
    decompositions: List[Decomposition]
    sigma: np.ndarray
    threshold: float
    threshold_state: ThresholdState
    initial_loss: float
    final_loss: float
    loss_history: List[float] = field(default_factory=list)
    net1_adam: Optional[AdamState] = None
    net2_adam: Optional[AdamState] = None
    streams: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def last_latents(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        if not self.variables:
            return None
        return self.variables[-1].u1.copy(), self.variables[-1].u2.copy()

    def masks(self) -> np.ndarray:
        return np.stack([d.mask for d in self.decompositions])
