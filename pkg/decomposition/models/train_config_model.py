from dataclasses import dataclass, asdict, fields
from typing import Any, ClassVar, Dict, Tuple

from ..validators import (
    validate_positive_int,
    validate_positive,
    validate_fraction,
    validate_prior_mode,
    validate_non_negative,
)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of batch training and online fitting

    minibatch_frames=0 picks the whole sequence when it has at most
    FULL_BATCH_LIMIT frames and DEFAULT_MINIBATCH frames otherwise.
    """
    FULL_BATCH_LIMIT: ClassVar[int] = 256
    DEFAULT_MINIBATCH: ClassVar[int] = 64

    latent_dim: int = 5
    hidden_sizes: Tuple[int, int] = (10, 20)
    weight_decay: float = 0.005
    learning_rate: float = 0.001
    epochs: int = 500
    minibatch_frames: int = 0
    online_iterations: int = 500
    online_stream: int = 10
    pretrain_fraction: float = 0.5
    threshold_factor: float = 2.0
    latent_init_std: float = 0.1
    prior_mode: str = 'shifted'
    seed: int = 0
    log_every: int = 50

    def __post_init__(self):
        object.__setattr__(self, 'hidden_sizes', tuple(int(h) for h in self.hidden_sizes))
        validate_positive_int(self.latent_dim, 'Latent size')
        for size in self.hidden_sizes:
            validate_positive_int(size, 'Hidden layer size')
        validate_positive_int(self.epochs, 'Epoch count')
        validate_positive_int(self.online_iterations, 'Online iteration count')
        validate_positive_int(self.online_stream, 'Online stream length')
        validate_positive_int(self.log_every, 'Log interval')
        validate_positive(self.learning_rate, 'Learning rate')
        validate_positive(self.threshold_factor, 'Threshold factor')
        validate_non_negative(self.weight_decay, 'Weight decay')
        validate_non_negative(self.latent_init_std, 'Latent init std')
        validate_non_negative(self.minibatch_frames, 'Minibatch size')
        validate_fraction(self.pretrain_fraction)
        validate_prior_mode(self.prior_mode)

    def batch_size_for(self, n_frames: int) -> int:
        if self.minibatch_frames:
            return min(self.minibatch_frames, n_frames)
        return n_frames if n_frames <= self.FULL_BATCH_LIMIT else self.DEFAULT_MINIBATCH

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['hidden_sizes'] = list(self.hidden_sizes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TrainConfig':
        """Build from any mapping holding (a superset of) the field names"""
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})
