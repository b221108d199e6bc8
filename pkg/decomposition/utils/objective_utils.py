"""
Evaluation of the full decomposition objective and its gradients
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from common.utils import DimensionMismatchError, check_same_shape
from gfcn.models import GfcnParams, ForwardCache, WEIGHT_NAMES
from gfcn.utils import gfcn_forward, gfcn_backward
from invariant.utils import noise_level
from .loss_utils import LossCalculator, NOISE_FLOOR, loss_reconst, loss_decomp, loss_reg, total_loss

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ObjectiveResult:
    """
    Loss terms, intermediate images and gradients for a set of frames
    (one row per frame). Gradient fields are None when not requested.
    """
    reconst: float
    decomp: float
    reg: float
    total: float
    b: np.ndarray
    b_inv: np.ndarray
    s: np.ndarray
    s_inv: np.ndarray
    prior: np.ndarray
    f: np.ndarray
    caches: Tuple[ForwardCache, ForwardCache]
    grad_net1: Optional[GfcnParams] = None
    grad_net2: Optional[GfcnParams] = None
    grad_u1: Optional[np.ndarray] = None
    grad_u2: Optional[np.ndarray] = None
    grad_c: Optional[np.ndarray] = None


class DecompositionObjective:
    """
    The objective over a fixed sequence and its invariant images

    sigma is fixed per frame (std of that frame's invariant image), so it
    carries no gradient; so is noise, the pixel noise level of each
    invariant image, which scales the shifted prior. online=True drops
    weight decay from the total.
    """

    def __init__(
        self,
        frames: np.ndarray,
        invariants: np.ndarray,
        weight_decay: float = 0.005,
        prior_mode: str = 'sigmoid',
        online: bool = False
    ):
        self.frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
        self.invariants = np.atleast_2d(np.asarray(invariants, dtype=np.float64))
        if self.frames.shape[0] != self.invariants.shape[0]:
            raise DimensionMismatchError(
                f"{self.frames.shape[0]} frames but {self.invariants.shape[0]} invariant images"
            )
        self.channels = LossCalculator.channels_of(self.frames.shape[1], self.invariants.shape[1])
        self.sigma = self.invariants.std(axis=1)
        self.noise = noise_level(self.invariants)
        self.weight_decay = weight_decay
        self.prior_mode = prior_mode
        self.online = online
        if prior_mode == 'shifted':
            self.prior_scale = np.maximum(self.noise, NOISE_FLOOR)
        else:
            self.prior_scale = self.sigma

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    def evaluate(
        self,
        net1: GfcnParams,
        net2: GfcnParams,
        u1: np.ndarray,
        u2: np.ndarray,
        c: np.ndarray,
        indices: Optional[np.ndarray] = None,
        compute_grads: bool = True,
        compute_param_grads: bool = True
    ) -> ObjectiveResult:
        """
        Evaluate the objective on a subset of frames

        Args:
            net1, net2: Background and invariant-background networks
            u1, u2, c: Per-frame variables, one row per selected frame
            indices: Selected frame indices (all frames when None)
            compute_grads: False for a loss-only evaluation
            compute_param_grads: False skips network gradients (frozen nets)

        Returns:
            ObjectiveResult
        """
        rows = np.arange(self.frame_count) if indices is None else np.asarray(indices)
        frames, invariants = self.frames[rows], self.invariants[rows]
        sigma = self.prior_scale[rows][:, np.newaxis]
        c = np.atleast_2d(np.asarray(c, dtype=np.float64))
        check_same_shape('illumination images', frames.shape, c.shape)

        b, cache1 = gfcn_forward(net1, np.atleast_2d(u1))
        b_inv, cache2 = gfcn_forward(net2, np.atleast_2d(u2))
        check_same_shape('background images', frames.shape, b.shape)
        check_same_shape('invariant backgrounds', invariants.shape, b_inv.shape)

        s = frames - b
        s_inv = invariants - b_inv
        prior = LossCalculator.prior_values(s_inv, sigma, self.prior_mode)
        f = s - c

        reconst = loss_reconst(frames, invariants, b, b_inv)
        decomp = loss_decomp(prior, c, f)
        reg = loss_reg(net1, net2, self.weight_decay)
        result = ObjectiveResult(
            reconst=reconst, decomp=decomp, reg=reg,
            total=total_loss(reconst, decomp, reg, online=self.online),
            b=b, b_inv=b_inv, s=s, s_inv=s_inv, prior=prior, f=f, caches=(cache1, cache2),
        )
        if compute_grads:
            self._backward(result, net1, net2, c, sigma, compute_param_grads)
        return result

    def _backward(self, result: ObjectiveResult, net1: GfcnParams, net2: GfcnParams, c: np.ndarray,
                  sigma: np.ndarray, compute_param_grads: bool) -> None:
        weights = LossCalculator.broadcast_prior(result.prior, self.channels)
        sign_f = np.sign(result.f)

        # C enters both |C| directly and |F| through F = S - C
        result.grad_c = weights * np.sign(c) - (1.0 - weights) * sign_f
        grad_b = -np.sign(result.s) - (1.0 - weights) * sign_f

        n, pixels = result.prior.shape
        grad_prior = (np.abs(c) - np.abs(result.f)).reshape(n, pixels, self.channels).sum(axis=2)
        grad_s_inv = np.sign(result.s_inv) + grad_prior * LossCalculator.prior_slope(
            result.s_inv, sigma, result.prior, self.prior_mode)

        grad_net1, result.grad_u1 = gfcn_backward(net1, result.caches[0], grad_b, compute_param_grads)
        grad_net2, result.grad_u2 = gfcn_backward(net2, result.caches[1], -grad_s_inv, compute_param_grads)

        if compute_param_grads and not self.online:
            for grads, params in ((grad_net1, net1), (grad_net2, net2)):
                for name in WEIGHT_NAMES:
                    setattr(grads, name, getattr(grads, name) + self.weight_decay * getattr(params, name))
        result.grad_net1, result.grad_net2 = grad_net1, grad_net2
