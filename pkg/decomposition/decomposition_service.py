"""
Batch training and online fitting of the decomposition model
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logit

from common.utils import CheckpointError, TrainingDivergedError, DimensionMismatchError
from gfcn.models import GfcnParams, AdamState
from gfcn.utils import init_params, adam_step
from invariant.models import InvariantFrame
from invariant.utils import invariant_matrix
from sequence.models import Sequence
from .models import (
    TrainConfig,
    FrameVariables,
    Decomposition,
    ThresholdState,
    TrainingResult,
)
from .utils.objective_utils import DecompositionObjective, ObjectiveResult
from .utils.threshold_utils import threshold_foreground

logger = logging.getLogger(__name__)

# Starting outputs are kept this far inside (0, 1)
OUTPUT_CLIP = 0.01


class DecompositionService:
    """
    Fits Net1 (background), Net2 (invariant background) and the per-frame
    variables {u1, u2, C} to a sequence

    Every frame keeps its own Adam state for its variables; the networks
    share one Adam state each. Minibatches are processed in ascending frame
    order, so results depend only on the seed. Both networks start from the
    per-pixel temporal median of their targets as output.
    """

    def __init__(self, config: TrainConfig):
        self.config = config

    def _stack(self, sequence: Sequence, invariant_frames: List[InvariantFrame]) -> Tuple[np.ndarray, np.ndarray]:
        if len(invariant_frames) != len(sequence):
            raise DimensionMismatchError(
                f"{len(sequence)} frames but {len(invariant_frames)} invariant images"
            )
        return sequence.matrix(), invariant_matrix(invariant_frames)

    def _latents(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.normal(0.0, self.config.latent_init_std, size=(count, self.config.latent_dim))

    @staticmethod
    def _median_logits(rows: np.ndarray) -> np.ndarray:
        """Output-layer bias whose sigmoid is the per-pixel temporal median"""
        return logit(np.clip(np.median(rows, axis=0), OUTPUT_CLIP, 1.0 - OUTPUT_CLIP))

    @staticmethod
    def _check_loss(value: float, stage: str, learning_rate: float) -> None:
        if not np.isfinite(value):
            raise TrainingDivergedError(
                f"Objective became {value} during {stage}; lower the learning rate "
                f"(currently {learning_rate}) or check the input frames for invalid values",
                details={'stage': stage, 'learning_rate': learning_rate}
            )

    @staticmethod
    def _step_network(state: AdamState, params: GfcnParams, grads: GfcnParams) -> Tuple[GfcnParams, AdamState]:
        flat, state = adam_step(state, params.flatten(), grads.flatten())
        if not np.all(np.isfinite(flat)):
            raise TrainingDivergedError("Network parameters became non-finite")
        return params.unflatten_like(flat), state

    @staticmethod
    def _step_frames(states: List[AdamState], rows: np.ndarray, u1: np.ndarray, u2: np.ndarray,
                     c: np.ndarray, result: ObjectiveResult, local_rows: Optional[np.ndarray] = None) -> None:
        """
        Adam update of [u1, u2, c] for every frame in rows, in place

        result holds one gradient row per entry of rows; local_rows maps
        them to rows of u1/u2/c when those arrays cover only a subset.
        """
        d = u1.shape[1]
        targets = rows if local_rows is None else local_rows
        for k, (frame, target) in enumerate(zip(rows, targets)):
            flat = np.concatenate([u1[target], u2[target], c[target]])
            grads = np.concatenate([result.grad_u1[k], result.grad_u2[k], result.grad_c[k]])
            flat, states[frame] = adam_step(states[frame], flat, grads)
            if not np.all(np.isfinite(flat)):
                raise TrainingDivergedError(f"Variables of frame {frame} became non-finite")
            u1[target], u2[target], c[target] = flat[:d], flat[d:2 * d], flat[2 * d:]

    @staticmethod
    def _decompositions(frame_ids: List[str], result: ObjectiveResult, c: np.ndarray,
                        masks: np.ndarray) -> List[Decomposition]:
        return [
            Decomposition(frame_id=frame_id, b_img=result.b[k], c_img=c[k], f_img=result.f[k],
                          s_img=result.s[k], mask=masks[k])
            for k, frame_id in enumerate(frame_ids)
        ]

    def train_batch(self, sequence: Sequence, invariant_frames: List[InvariantFrame]) -> TrainingResult:
        """
        Optimize the networks and every frame's variables on the full objective

        Args:
            sequence: Input frames
            invariant_frames: psi of each frame, same order

        Returns:
            TrainingResult with decompositions and masks for every frame
        """
        cfg = self.config
        frames, invariants = self._stack(sequence, invariant_frames)
        n, m = frames.shape
        pixels = invariants.shape[1]

        rng = np.random.default_rng(cfg.seed)
        net1 = init_params(cfg.latent_dim, m, seed=cfg.seed, hidden_sizes=cfg.hidden_sizes,
                           output_bias=self._median_logits(frames))
        net2 = init_params(cfg.latent_dim, pixels, seed=cfg.seed + 1, hidden_sizes=cfg.hidden_sizes,
                           output_bias=self._median_logits(invariants))
        u1, u2 = self._latents(rng, n), self._latents(rng, n)
        c = np.zeros((n, m))

        objective = DecompositionObjective(frames, invariants, cfg.weight_decay, cfg.prior_mode)
        adam1 = AdamState.fresh(net1.size, cfg.learning_rate)
        adam2 = AdamState.fresh(net2.size, cfg.learning_rate)
        frame_states = [AdamState.fresh(2 * cfg.latent_dim + m, cfg.learning_rate) for _ in range(n)]
        batch_size = cfg.batch_size_for(n)

        initial = objective.evaluate(net1, net2, u1, u2, c, compute_grads=False).total
        self._check_loss(initial, 'initialization', cfg.learning_rate)
        logger.info(
            f"Batch training: {n} frames of {sequence.width}x{sequence.height}x{sequence.channels}, "
            f"{cfg.epochs} epochs, minibatch {batch_size}, {cfg.prior_mode} prior, initial loss {initial:.6g}"
        )

        history = []
        for epoch in range(1, cfg.epochs + 1):
            order = np.arange(n) if batch_size >= n else rng.permutation(n)
            for start in range(0, n, batch_size):
                rows = np.sort(order[start:start + batch_size])
                result = objective.evaluate(net1, net2, u1[rows], u2[rows], c[rows], indices=rows)
                self._check_loss(result.total, f"epoch {epoch}", cfg.learning_rate)
                net1, adam1 = self._step_network(adam1, net1, result.grad_net1)
                net2, adam2 = self._step_network(adam2, net2, result.grad_net2)
                self._step_frames(frame_states, rows, u1, u2, c, result)

            loss = objective.evaluate(net1, net2, u1, u2, c, compute_grads=False).total
            self._check_loss(loss, f"epoch {epoch}", cfg.learning_rate)
            history.append(loss)
            logger.debug(f"Epoch {epoch}: loss {loss:.6g}")
            if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
                logger.info(f"Epoch {epoch}/{cfg.epochs}: loss {loss:.6g}")

        final = objective.evaluate(net1, net2, u1, u2, c, compute_grads=False)
        if final.total > initial:
            logger.warning(f"Final loss {final.total:.6g} exceeds initial loss {initial:.6g}")

        masks, t, state = threshold_foreground(final.f, sequence.channels, 'batch',
                                               factor=cfg.threshold_factor)
        logger.info(f"Batch training done: loss {initial:.6g} -> {final.total:.6g}, t={t:.6g}")
        return TrainingResult(
            net1=net1, net2=net2,
            variables=FrameVariables.from_rows(u1, u2, c),
            decompositions=self._decompositions(sequence.frame_ids, final, c, masks),
            sigma=objective.sigma.copy(),
            threshold=t,
            threshold_state=state,
            initial_loss=initial,
            final_loss=final.total,
            loss_history=history,
            net1_adam=adam1,
            net2_adam=adam2,
        )

    def train_online(
        self,
        net1: Optional[GfcnParams],
        net2: Optional[GfcnParams],
        sequence: Sequence,
        invariant_frames: List[InvariantFrame],
        warm_start: Optional[Tuple[np.ndarray, np.ndarray]] = None,
        threshold_state: Optional[ThresholdState] = None
    ) -> TrainingResult:
        """
        Fit incoming frames in streams with frozen networks

        Each stream of config.online_stream frames starts from the latent
        codes of the most recently processed frame (random codes when there
        is none) and C = 0, then runs config.online_iterations Adam steps on
        the objective without weight decay. Masks use the running threshold
        statistics, updated once per stream; pixels the prior assigns to
        illumination add nothing to them.

        Args:
            net1, net2: Pretrained networks, never modified
            sequence: New frames
            invariant_frames: psi of each new frame
            warm_start: (u1, u2) of the last frame processed before these
            threshold_state: Running statistics from earlier frames

        Returns:
            TrainingResult; net1/net2 are the same objects that were passed in
        """
        if net1 is None or net2 is None:
            raise CheckpointError("Online fitting needs pretrained networks")
        cfg = self.config
        frames, invariants = self._stack(sequence, invariant_frames)
        n, m = frames.shape
        if net1.output_dim != m or net2.output_dim != invariants.shape[1]:
            raise DimensionMismatchError(
                f"Pretrained networks produce {net1.output_dim}/{net2.output_dim} values, "
                f"frames need {m}/{invariants.shape[1]}"
            )
        d = net1.latent_dim

        rng = np.random.default_rng(cfg.seed + 2)
        objective = DecompositionObjective(frames, invariants, cfg.weight_decay, cfg.prior_mode, online=True)
        state = threshold_state or ThresholdState()
        last = warm_start

        variables: List[FrameVariables] = []
        decompositions: List[Decomposition] = []
        streams = []
        history = []
        initial_total, final_total = 0.0, 0.0
        for start in range(0, n, cfg.online_stream):
            rows = np.arange(start, min(start + cfg.online_stream, n))
            count = rows.size
            if last is None:
                u1 = rng.normal(0.0, cfg.latent_init_std, size=(count, d))
                u2 = rng.normal(0.0, cfg.latent_init_std, size=(count, d))
            else:
                u1 = np.tile(last[0], (count, 1))
                u2 = np.tile(last[1], (count, 1))
            c = np.zeros((count, m))
            frame_states = {int(row): AdamState.fresh(2 * d + m, cfg.learning_rate) for row in rows}

            first = objective.evaluate(net1, net2, u1, u2, c, indices=rows, compute_grads=False).total
            self._check_loss(first, f"stream at frame {start}", cfg.learning_rate)
            for _ in range(cfg.online_iterations):
                result = objective.evaluate(net1, net2, u1, u2, c, indices=rows, compute_param_grads=False)
                self._check_loss(result.total, f"stream at frame {start}", cfg.learning_rate)
                self._step_frames(frame_states, rows, u1, u2, c, result, local_rows=np.arange(count))

            final = objective.evaluate(net1, net2, u1, u2, c, indices=rows, compute_grads=False)
            masks, t, state = threshold_foreground(final.f, sequence.channels, 'online', state,
                                                   factor=cfg.threshold_factor, prior=final.prior)
            ids = [sequence.frame_ids[row] for row in rows]
            variables.extend(FrameVariables.from_rows(u1, u2, c))
            decompositions.extend(self._decompositions(ids, final, c, masks))
            last = (u1[-1].copy(), u2[-1].copy())

            initial_total += first
            final_total += final.total
            history.append(final.total)
            streams.append({
                'first_frame': ids[0],
                'last_frame': ids[-1],
                'frames': count,
                'initial_loss': first,
                'final_loss': final.total,
                'threshold': t,
            })
            logger.info(f"Stream {ids[0]}..{ids[-1]}: loss {first:.6g} -> {final.total:.6g}, t={t:.6g}")

        return TrainingResult(
            net1=net1, net2=net2,
            variables=variables,
            decompositions=decompositions,
            sigma=objective.sigma.copy(),
            threshold=streams[-1]['threshold'] if streams else 0.0,
            threshold_state=state,
            initial_loss=initial_total,
            final_loss=final_total,
            loss_history=history,
            streams=streams,
        )
