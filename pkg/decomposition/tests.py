import json
import math
import tempfile
from pathlib import Path
from unittest import skipUnless

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from scipy.special import expit

from common.utils import (
    CheckpointError,
    DimensionMismatchError,
    TrainingDivergedError,
    EXIT_RUNTIME_FAILURE,
    EXIT_USAGE_ERROR,
)
from evaluation.utils import confusion, evaluate_masks
from gfcn.models import GfcnParams, AdamState
from gfcn.utils import init_params
from invariant.models import InvariantModel
from invariant.utils import InvariantTransformer
from sequence.models import Frame, Sequence
from sequence.utils import load_sequence, load_masks
from synth.models import SynthConfig, SynthObject, IlluminationEvent
from synth.utils import generate, standard_fixture_config
from .decomposition_service import DecompositionService
from .models import PriorMap, ThresholdState, TrainConfig, ModelCheckpoint, FrameVariables
from .utils import (
    DecompositionObjective,
    compute_prior_map,
    loss_reconst,
    loss_decomp,
    loss_reg,
    total_loss,
    threshold_foreground,
    save_checkpoint,
    load_checkpoint,
    mask_sequence,
)


def random_params(rng, latent_dim, output_dim):
    shapes = GfcnParams.shapes(latent_dim, (10, 20), output_dim)
    return GfcnParams(**{name: rng.normal(0.0, 0.5, size=shape) for name, shape in shapes.items()})


def invariants_of(sequence):
    return InvariantTransformer.psi_sequence(sequence, InvariantModel())


def constant_sequence(value=0.4, frames=6, size=8):
    data = np.full(size * size * 3, value)
    return Sequence(frames=[Frame(data=data, width=size, height=size, channels=3) for _ in range(frames)],
                    frame_ids=[f"in{k:06d}" for k in range(1, frames + 1)])


def random_sequence(seed=0, frames=3, size=4):
    rng = np.random.default_rng(seed)
    return Sequence.from_matrix(rng.uniform(0.05, 0.95, size=(frames, size * size * 3)), size, size, 3,
                                [f"in{k:06d}" for k in range(1, frames + 1)])


class PriorMapTest(SimpleTestCase):

    def test_residual_equal_to_sigma_gives_half(self):
        prior = compute_prior_map(np.array([0.3, 0.1]), sigma=0.3)
        self.assertEqual(prior.m_values[0], 0.5)

    def test_distance_three(self):
        prior = compute_prior_map(np.array([3.5, -2.5]), sigma=0.5)
        np.testing.assert_allclose(prior.m_values, [1.0 / (1.0 + math.exp(-3.0))] * 2, rtol=0, atol=1e-15)
        self.assertAlmostEqual(prior.m_values[0], 0.9526, places=4)

    def test_zero_residual_zero_sigma(self):
        prior = compute_prior_map(np.zeros(9), sigma=0.0)
        np.testing.assert_array_equal(prior.m_values, np.full(9, 0.5))

    def test_values_within_half_open_range(self):
        rng = np.random.default_rng(0)
        s_inv = rng.uniform(-1.0, 1.0, size=500)
        sigma = 0.2
        prior = compute_prior_map(s_inv, sigma)
        self.assertTrue(np.all(prior.m_values >= 0.5) and np.all(prior.m_values < 1.0))
        exact = np.array([0.2, 0.2])
        np.testing.assert_array_equal(compute_prior_map(exact, sigma).m_values, [0.5, 0.5])

    def test_shifted_prior_is_half_three_noise_levels_out(self):
        prior = compute_prior_map(np.array([0.0, 0.6, -0.6, 0.9]), sigma=0.2, prior_mode='shifted')
        self.assertAlmostEqual(prior.m_values[0], 1.0 / (1.0 + math.exp(6.0)), places=15)
        self.assertAlmostEqual(prior.m_values[1], 0.5, places=12)
        self.assertEqual(prior.m_values[1], prior.m_values[2])
        self.assertAlmostEqual(prior.m_values[3], 1.0 / (1.0 + math.exp(-3.0)), places=12)

    def test_shifted_prior_sends_noise_to_illumination(self):
        rng = np.random.default_rng(3)
        noise = rng.normal(0.0, 0.07, size=4096)
        objects = 0.35 + rng.normal(0.0, 0.07, size=64)
        prior = compute_prior_map(np.concatenate([noise, objects]), sigma=0.07, prior_mode='shifted')
        self.assertLess(np.mean(prior.m_values[:4096] >= 0.5), 0.01)
        self.assertGreater(np.mean(prior.m_values[4096:] >= 0.5), 0.9)

    def test_broadcast_over_channels(self):
        prior = PriorMap(m_values=np.array([0.5, 0.9]), sigma=0.1)
        np.testing.assert_array_equal(prior.broadcast(3), [0.5, 0.5, 0.5, 0.9, 0.9, 0.9])

    def test_rejects_negative_sigma(self):
        with self.assertRaises(ValidationError):
            PriorMap(m_values=np.array([0.5]), sigma=-1.0)


class LossTermsTest(SimpleTestCase):

    def test_reconst_zero_at_exact_fit(self):
        rng = np.random.default_rng(1)
        frames, invariants = rng.uniform(size=(2, 12)), rng.uniform(size=(2, 4))
        self.assertEqual(loss_reconst(frames, invariants, frames, invariants), 0.0)

    def test_reconst_single_pixel(self):
        self.assertEqual(loss_reconst(np.array([1.0]), np.array([0.0]), np.array([0.25]), np.array([0.0])), 0.75)

    def test_reconst_matches_elementwise_sum(self):
        rng = np.random.default_rng(2)
        frames, b = rng.uniform(size=(3, 12)), rng.uniform(size=(3, 12))
        invariants, b_inv = rng.uniform(size=(3, 4)), rng.uniform(size=(3, 4))
        expected = 0.0
        for i in range(3):
            expected += sum(abs(frames[i, k] - b[i, k]) for k in range(12))
            expected += sum(abs(invariants[i, k] - b_inv[i, k]) for k in range(4))
        self.assertAlmostEqual(loss_reconst(frames, invariants, b, b_inv), expected, delta=1e-12)

    def test_decomp_zero(self):
        self.assertEqual(loss_decomp(np.full((1, 4), 0.7), np.zeros((1, 4)), np.zeros((1, 4))), 0.0)

    def test_decomp_single_pixel(self):
        value = loss_decomp([PriorMap(m_values=np.array([0.5]), sigma=0.0)], [np.array([0.2])], [np.array([-0.4])])
        self.assertAlmostEqual(value, 0.3, places=15)

    def test_decomp_repeats_prior_over_channels(self):
        rng = np.random.default_rng(3)
        prior = rng.uniform(0.5, 1.0, size=(2, 4))
        c, f = rng.normal(size=(2, 12)), rng.normal(size=(2, 12))
        expected = 0.0
        for i in range(2):
            for pixel in range(4):
                for channel in range(3):
                    k = pixel * 3 + channel
                    expected += prior[i, pixel] * abs(c[i, k]) + (1.0 - prior[i, pixel]) * abs(f[i, k])
        self.assertAlmostEqual(loss_decomp(prior, c, f), expected, delta=1e-12)

    def test_decomp_gradient_in_c_is_prior(self):
        prior, f = np.array([[0.97]]), np.array([[0.3]])
        for c in (0.2, -0.2):
            h = 1e-6
            slope = (loss_decomp(prior, np.array([[c + h]]), f) - loss_decomp(prior, np.array([[c - h]]), f)) / (2 * h)
            self.assertAlmostEqual(abs(slope), 0.97, places=8)

    def test_reg(self):
        zero = GfcnParams.from_flat(np.zeros(init_params(5, 3, seed=0).size), 5, (10, 20), 3)
        self.assertEqual(loss_reg(zero, zero, 0.005), 0.0)
        self.assertAlmostEqual(loss_reg([np.array([2.0])], [], 0.005), 0.01, places=15)

    def test_reg_ignores_biases(self):
        params = init_params(5, 3, seed=1)
        shifted = params.copy()
        shifted.b1 += 3.0
        shifted.b3 -= 1.0
        self.assertEqual(loss_reg(params, params, 0.005), loss_reg(shifted, shifted, 0.005))

    def test_total(self):
        self.assertEqual(total_loss(0.0, 0.0, 0.0), 0.0)
        self.assertAlmostEqual(total_loss(1.5, 0.25, 0.01), 1.76, places=12)
        self.assertEqual(total_loss(1.5, 0.25, 0.01, online=True), 1.75)


class ObjectiveGradientTest(SimpleTestCase):
    """Analytic gradients of the full objective against central differences"""

    @staticmethod
    def _instance(rng, prior_mode, online):
        frames = rng.uniform(0.0, 1.0, size=(2, 48))
        invariants = rng.uniform(0.0, 1.0, size=(2, 16))
        objective = DecompositionObjective(frames, invariants, weight_decay=0.005, prior_mode=prior_mode,
                                           online=online)
        state = [random_params(rng, 5, 48), random_params(rng, 5, 16),
                 rng.normal(size=(2, 5)), rng.normal(size=(2, 5)), rng.normal(0.0, 0.2, size=(2, 48))]
        return objective, state

    @staticmethod
    def _pack(net1, net2, u1, u2, c):
        return np.concatenate([net1.flatten(), net2.flatten(), u1.ravel(), u2.ravel(), c.ravel()])

    @staticmethod
    def _unpack(theta, net1, net2):
        a, b = net1.size, net1.size + net2.size
        return (net1.unflatten_like(theta[:a]), net2.unflatten_like(theta[a:b]),
                theta[b:b + 10].reshape(2, 5), theta[b + 10:b + 20].reshape(2, 5), theta[b + 20:].reshape(2, 48))

    def test_full_objective_gradients(self):
        rng = np.random.default_rng(7)
        for instance in range(100):
            prior_mode = ('sigmoid', 'shifted')[instance % 2]
            online = instance % 5 == 4
            objective, (net1, net2, u1, u2, c) = self._instance(rng, prior_mode, online)
            sigma = objective.sigma[:, np.newaxis]

            def loss(theta):
                return objective.evaluate(*self._unpack(theta, net1, net2), compute_grads=False).total

            def signature(theta):
                unpacked = self._unpack(theta, net1, net2)
                result = objective.evaluate(*unpacked, compute_grads=False)
                parts = [np.sign(result.s), np.sign(result.s_inv), np.sign(result.f), np.sign(unpacked[4]),
                         np.sign(result.s_inv - sigma)]
                for cache in result.caches:
                    parts.extend([cache.z1 > 0, cache.z2 > 0])
                return b''.join(np.asarray(part, dtype=np.float64).tobytes() for part in parts)

            result = objective.evaluate(net1, net2, u1, u2, c, compute_param_grads=not online)
            theta = self._pack(net1, net2, u1, u2, c)
            if online:
                grad_params = np.zeros(net1.size + net2.size)
                self.assertIsNone(result.grad_net1)
            else:
                grad_params = np.concatenate([result.grad_net1.flatten(), result.grad_net2.flatten()])
            analytic = np.concatenate([grad_params, result.grad_u1.ravel(), result.grad_u2.ravel(),
                                       result.grad_c.ravel()])

            first_latent = net1.size + net2.size
            pool = np.arange(first_latent, theta.size) if online else np.arange(theta.size)
            components = rng.choice(pool, size=40, replace=False)
            for k in components:
                for h in (1e-5, 1e-7):
                    plus, minus = theta.copy(), theta.copy()
                    plus[k] += h
                    minus[k] -= h
                    if signature(plus) == signature(minus):
                        numeric = (loss(plus) - loss(minus)) / (2.0 * h)
                        np.testing.assert_allclose(
                            analytic[k], numeric, rtol=1e-4, atol=1e-6,
                            err_msg=f"instance {instance}, component {k} ({prior_mode}, online={online})")
                        break

    def test_online_objective_drops_weight_decay(self):
        rng = np.random.default_rng(8)
        objective, state = self._instance(rng, 'sigmoid', online=False)
        online = DecompositionObjective(objective.frames, objective.invariants, weight_decay=0.005, online=True)
        batch_result = objective.evaluate(*state, compute_grads=False)
        online_result = online.evaluate(*state, compute_grads=False)
        self.assertGreater(batch_result.reg, 0.0)
        self.assertAlmostEqual(online_result.total, batch_result.total - batch_result.reg, places=10)

    def test_sigma_is_per_frame_invariant_std(self):
        invariants = np.array([[0.0, 1.0, 0.0, 1.0], [0.5, 0.5, 0.5, 0.5]])
        objective = DecompositionObjective(np.zeros((2, 12)), invariants)
        np.testing.assert_array_equal(objective.sigma, [0.5, 0.0])

    def test_shifted_prior_scale_is_invariant_noise_level(self):
        rng = np.random.default_rng(4)
        ramp = np.linspace(0.0, 1.0, 4096)
        invariants = np.stack([ramp + rng.normal(0.0, 0.05, size=4096), np.full(4096, 0.5)])
        objective = DecompositionObjective(np.zeros((2, 4096)), invariants, prior_mode='shifted')
        self.assertAlmostEqual(objective.prior_scale[0], 0.05, delta=0.005)
        self.assertEqual(objective.prior_scale[1], 0.01)
        self.assertGreater(objective.sigma[0], 0.25)
        np.testing.assert_array_equal(DecompositionObjective(np.zeros((2, 4096)), invariants).prior_scale,
                                      objective.sigma)


class ThresholdTest(SimpleTestCase):

    def test_zero_foreground_gives_empty_masks(self):
        masks, t, _ = threshold_foreground(np.zeros((3, 12)), channels=3)
        self.assertEqual(t, 1e-6)
        self.assertEqual(masks.sum(), 0)
        self.assertEqual(masks.shape, (3, 4))

    def test_single_outlier(self):
        f = np.zeros((1, 100))
        f[0, 37] = 10.0
        masks, _, _ = threshold_foreground(f)
        self.assertEqual(list(np.flatnonzero(masks[0])), [37])

    def test_uses_largest_channel(self):
        f = np.zeros((1, 30))
        f[0, 7] = -5.0
        masks, _, _ = threshold_foreground(f, channels=3)
        self.assertEqual(list(np.flatnonzero(masks[0])), [2])

    def test_scaling_leaves_masks_unchanged(self):
        f = np.random.default_rng(0).standard_t(3, size=(4, 48))
        reference, _, _ = threshold_foreground(f, channels=3)
        for scale in (2.0, 0.5, 3.7):
            masks, _, _ = threshold_foreground(scale * f, channels=3)
            np.testing.assert_array_equal(masks, reference)

    def test_online_threshold_uses_running_statistics(self):
        rng = np.random.default_rng(1)
        first, second = rng.normal(size=(3, 12)), rng.normal(2.0, 3.0, size=(2, 12))
        _, _, state = threshold_foreground(first, mode='online')
        masks, t, state = threshold_foreground(second, mode='online', state=state)
        pooled = np.concatenate([first.ravel(), second.ravel()])
        self.assertAlmostEqual(t, float(np.std(pooled)), places=12)
        self.assertEqual(state.count, pooled.size)
        np.testing.assert_array_equal(masks, (np.abs(second) >= 2.0 * t).astype(np.uint8))

    def test_illumination_pixels_stay_out_of_running_statistics(self):
        f = np.zeros((2, 12))
        f[0, 0:3] = 0.4
        f[1, 6:12] = 0.9
        prior = np.array([[0.9, 0.1, 0.1, 0.1], [0.1, 0.1, 0.2, 0.3]])
        masks, t, state = threshold_foreground(f, channels=3, mode='online', prior=prior)
        kept = f.copy()
        kept[1] = 0.0
        self.assertAlmostEqual(t, float(np.std(kept)), places=12)
        self.assertEqual(state.count, 24)
        np.testing.assert_array_equal(masks, [[1, 0, 0, 0], [0, 0, 1, 1]])
        _, unfiltered, _ = threshold_foreground(f, channels=3, mode='online')
        self.assertGreater(unfiltered, t)

    def test_prior_shape_must_match(self):
        with self.assertRaises(DimensionMismatchError):
            threshold_foreground(np.zeros((2, 12)), channels=3, mode='online', prior=np.zeros((2, 3)))

    def test_state_merge_matches_pooled_moments(self):
        rng = np.random.default_rng(2)
        chunks = [rng.normal(size=n) for n in (5, 17, 1, 40)]
        state = ThresholdState()
        for chunk in chunks:
            state = state.merge(chunk)
        pooled = np.concatenate(chunks)
        self.assertAlmostEqual(state.mean, pooled.mean(), places=12)
        self.assertAlmostEqual(state.std, pooled.std(), places=12)


class TrainBatchTest(SimpleTestCase):

    def test_constant_sequence_fits_background(self):
        sequence = constant_sequence()
        config = TrainConfig(learning_rate=0.005, epochs=400, seed=0)
        result = DecompositionService(config).train_batch(sequence, invariants_of(sequence))
        frames = sequence.matrix()
        background = np.stack([d.b_img for d in result.decompositions])
        foreground = np.stack([d.f_img for d in result.decompositions])
        self.assertLess(np.abs(frames - background).mean(), 0.02)
        self.assertLess(np.abs(foreground).mean(), 0.02)

    def test_decomposition_identity_and_ranges(self):
        sequence = random_sequence(seed=1)
        result = DecompositionService(TrainConfig(epochs=15, seed=3)).train_batch(sequence, invariants_of(sequence))
        for frame, decomposition in zip(sequence.frames, result.decompositions):
            self.assertLessEqual(np.max(np.abs(frame.data - decomposition.reconstruction())), 1e-12)
            np.testing.assert_array_equal(decomposition.s_img, frame.data - decomposition.b_img)
            self.assertTrue(np.all(decomposition.b_img > 0.0) and np.all(decomposition.b_img < 1.0))
            self.assertEqual(decomposition.mask.size, 16)

    def test_loss_decreases(self):
        sequence = random_sequence(seed=2)
        result = DecompositionService(TrainConfig(epochs=20, seed=0)).train_batch(sequence, invariants_of(sequence))
        self.assertLessEqual(result.final_loss, result.initial_loss)
        self.assertEqual(len(result.loss_history), 20)
        self.assertEqual(result.loss_history[-1], result.final_loss)

    def test_same_seed_same_result(self):
        sequence = random_sequence(seed=4)
        config = TrainConfig(epochs=10, seed=5)
        first = DecompositionService(config).train_batch(sequence, invariants_of(sequence))
        second = DecompositionService(config).train_batch(sequence, invariants_of(sequence))
        np.testing.assert_array_equal(first.masks(), second.masks())
        self.assertEqual(first.loss_history, second.loss_history)
        self.assertEqual(first.net1.checksum(), second.net1.checksum())

    def test_minibatches_cover_every_frame(self):
        sequence = random_sequence(seed=5, frames=5)
        config = TrainConfig(epochs=3, minibatch_frames=2, seed=0)
        self.assertEqual(config.batch_size_for(5), 2)
        result = DecompositionService(config).train_batch(sequence, invariants_of(sequence))
        for variables in result.variables:
            self.assertTrue(np.any(variables.c != 0.0))

    def test_divergence_is_reported(self):
        with self.assertRaises(TrainingDivergedError):
            DecompositionService._check_loss(float('nan'), 'epoch 1', 0.001)

    def test_starting_output_is_temporal_median(self):
        rows = np.array([[0.2, 0.0, 0.5], [0.4, 1.0, 0.5], [0.9, 1.0, 0.5]])
        np.testing.assert_allclose(expit(DecompositionService._median_logits(rows)), [0.4, 0.99, 0.5],
                                   rtol=0, atol=1e-12)

    def test_gain_change_is_carried_by_illumination(self):
        sequence, truth, _ = gain_sequence()
        result = DecompositionService(TrainConfig(seed=0)).train_batch(sequence, invariants_of(sequence))
        for decomposition, mask in zip(result.decompositions[20:], truth.masks[20:]):
            background = np.repeat(mask.reshape(-1) == 0, 3)
            s, c, f = (np.abs(getattr(decomposition, name)[background]) for name in ('s_img', 'c_img', 'f_img'))
            self.assertGreater(c.mean(), 0.7 * s.mean())
            self.assertLess(np.mean(f > 0.05), 0.02)
            self.assertLess(confusion(decomposition.mask, mask).fp / mask.size, 0.05)


class TrainConfigTest(SimpleTestCase):

    def test_defaults(self):
        config = TrainConfig()
        self.assertEqual((config.latent_dim, config.hidden_sizes, config.weight_decay, config.learning_rate),
                         (5, (10, 20), 0.005, 0.001))
        self.assertEqual((config.online_stream, config.pretrain_fraction, config.threshold_factor), (10, 0.5, 2.0))
        self.assertEqual((config.epochs, config.online_iterations, config.prior_mode), (500, 500, 'shifted'))

    def test_batch_size(self):
        config = TrainConfig()
        self.assertEqual(config.batch_size_for(100), 100)
        self.assertEqual(config.batch_size_for(256), 256)
        self.assertEqual(config.batch_size_for(300), 64)

    def test_invalid_values(self):
        for field, value in (('pretrain_fraction', 1.0), ('learning_rate', 0.0), ('epochs', 0),
                             ('prior_mode', 'linear'), ('latent_dim', 0)):
            with self.assertRaises(ValidationError):
                TrainConfig(**{field: value})

    def test_from_run_config_ignores_other_keys(self):
        config = TrainConfig.from_dict({'epochs': 7, 'threads': 4, 'mode': 'online', 'hidden_sizes': [3, 4]})
        self.assertEqual(config.epochs, 7)
        self.assertEqual(config.hidden_sizes, (3, 4))


def gain_sequence(seed=0):
    """20x20 noisy scene with a moving object; gains vary over the first 20 frames and jump at frame 20"""
    rng = np.random.default_rng(seed)
    events = [IlluminationEvent(kind='global_gain', start=t, end=t, magnitude=float(g))
              for t, g in enumerate(rng.uniform(0.75, 1.3, size=20))]
    events.append(IlluminationEvent(kind='global_gain', start=20, end=29, magnitude=1.25))
    config = SynthConfig(
        width=20, height=20, n_frames=30, background='gradient', background_seed=seed,
        objects=[SynthObject(size=(4, 4), color=(0.95, 0.9, 0.1), start=(0.0, 8.0), velocity=(0.5, 0.0))],
        events=events, noise_std=0.01, seed=seed,
    )
    return generate(config)


class TrainOnlineTest(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.sequence, cls.masks, _ = gain_sequence()
        cls.invariants = invariants_of(cls.sequence)
        cls.service = DecompositionService(TrainConfig(seed=0))
        cls.pretrain = cls.service.train_batch(cls.sequence.subset(0, 20), cls.invariants[:20])

    def test_weights_frozen(self):
        before = (self.pretrain.net1.checksum(), self.pretrain.net2.checksum())
        result = self.service.train_online(self.pretrain.net1, self.pretrain.net2, self.sequence.subset(20, 30),
                                           self.invariants[20:], self.pretrain.last_latents,
                                           self.pretrain.threshold_state)
        self.assertEqual((result.net1.checksum(), result.net2.checksum()), before)
        self.assertIs(result.net1, self.pretrain.net1)
        self.assertEqual(len(result.streams), 1)
        self.assertEqual(len(result.decompositions), 10)

    def test_sudden_gain_change_gives_no_whole_frame_false_positives(self):
        result = self.service.train_online(self.pretrain.net1, self.pretrain.net2, self.sequence.subset(20, 30),
                                           self.invariants[20:], self.pretrain.last_latents,
                                           self.pretrain.threshold_state)
        for decomposition, truth in zip(result.decompositions, self.masks.masks[20:]):
            false_positives = confusion(decomposition.mask, truth).fp
            self.assertLess(false_positives / truth.size, 0.05)

    def test_seen_frames_reconstruct_like_batch(self):
        seen = self.sequence.subset(0, 20)
        result = self.service.train_online(self.pretrain.net1, self.pretrain.net2, seen, self.invariants[:20],
                                           self.pretrain.last_latents, self.pretrain.threshold_state)
        for frame, batch, online in zip(seen.frames, self.pretrain.decompositions, result.decompositions):
            batch_error = np.abs(frame.data - batch.b_img).mean()
            online_error = np.abs(frame.data - online.b_img).mean()
            self.assertLessEqual(online_error, 2.0 * batch_error)

    def test_streams_follow_stream_length(self):
        config = TrainConfig(online_iterations=3, online_stream=4, seed=0)
        result = DecompositionService(config).train_online(
            self.pretrain.net1, self.pretrain.net2, self.sequence.subset(20, 30), self.invariants[20:])
        self.assertEqual([s['frames'] for s in result.streams], [4, 4, 2])
        for frame, decomposition in zip(self.sequence.frames[20:], result.decompositions):
            self.assertLessEqual(np.max(np.abs(frame.data - decomposition.reconstruction())), 1e-12)

    def test_needs_pretrained_networks(self):
        with self.assertRaises(CheckpointError):
            self.service.train_online(None, None, self.sequence, self.invariants)


class CheckpointTest(SimpleTestCase):

    def _checkpoint(self):
        rng = np.random.default_rng(0)
        net1, net2 = random_params(rng, 5, 48), random_params(rng, 5, 16)
        return ModelCheckpoint(
            width=4, height=4, channels=3, net1=net1, net2=net2,
            net1_adam=AdamState(step_count=3, first_moment=rng.normal(size=net1.size),
                                second_moment=rng.uniform(size=net1.size)),
            net2_adam=AdamState.fresh(net2.size),
            train_config=TrainConfig(epochs=12, prior_mode='shifted'),
            invariant_model=InvariantModel(theta=1.25, wiener_window=5, wiener_noise=0.01),
            last_u1=rng.normal(size=5), last_u2=rng.normal(size=5),
            threshold_state=ThresholdState(count=10, mean=0.1, m2=2.5),
        )

    def test_round_trip(self):
        checkpoint = self._checkpoint()
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(checkpoint, Path(tmp) / 'checkpoint.json')
            restored = load_checkpoint(path)
        self.assertEqual(restored.net1.checksum(), checkpoint.net1.checksum())
        self.assertEqual(restored.net2.checksum(), checkpoint.net2.checksum())
        np.testing.assert_array_equal(restored.net1_adam.second_moment, checkpoint.net1_adam.second_moment)
        self.assertEqual(restored.net1_adam.step_count, 3)
        self.assertEqual(restored.train_config, checkpoint.train_config)
        self.assertEqual(restored.invariant_model, checkpoint.invariant_model)
        self.assertEqual(restored.threshold_state, checkpoint.threshold_state)
        np.testing.assert_array_equal(restored.last_u1, checkpoint.last_u1)

    def test_rejects_other_formats(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(self._checkpoint(), Path(tmp) / 'checkpoint.json')
            payload = json.loads(path.read_text())
            payload['version'] = 2
            path.write_text(json.dumps(payload))
            with self.assertRaises(CheckpointError):
                load_checkpoint(path)

    def test_rejects_mismatched_networks(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(self._checkpoint(), Path(tmp) / 'checkpoint.json')
            payload = json.loads(path.read_text())
            payload['width'] = 5
            path.write_text(json.dumps(payload))
            with self.assertRaises(CheckpointError):
                load_checkpoint(path)

    def test_missing_file(self):
        with self.assertRaises(CheckpointError):
            load_checkpoint('/nonexistent/checkpoint.json')


class FrameVariablesTest(SimpleTestCase):

    def test_rows_round_trip(self):
        rng = np.random.default_rng(0)
        u1, u2, c = rng.normal(size=(3, 5)), rng.normal(size=(3, 5)), rng.normal(size=(3, 12))
        stacked = FrameVariables.stack(FrameVariables.from_rows(u1, u2, c))
        for original, restored in zip((u1, u2, c), stacked):
            np.testing.assert_array_equal(original, restored)

    def test_rejects_non_finite(self):
        with self.assertRaises(ValidationError):
            FrameVariables(u1=np.array([np.inf]), u2=np.zeros(1), c=np.zeros(3))


class TrainCommandTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.dataset = self.root / 'dataset'
        call_command('synth', str(self.dataset), preset='minimal')

    def tearDown(self):
        self.tmp.cleanup()

    def _train(self, output, **options):
        options.setdefault('epochs', 5)
        options.setdefault('theta', 0.5)
        call_command('train', str(self.dataset), output=str(output), **options)

    def test_batch_run_writes_outputs(self):
        output = self.root / 'run'
        self._train(output, evaluate=True)
        for name in ('background', 'illumination', 'foreground', 'masks', 'invariant'):
            self.assertEqual(len(list((output / name).glob('*.png'))), 20, name)
        manifest = json.loads((output / 'manifest.json').read_text())
        self.assertEqual(manifest['command'], 'train')
        self.assertEqual(manifest['config']['mode'], 'batch')
        self.assertEqual(len(manifest['loss_history']), 5)
        self.assertEqual(len(manifest['sigma']), 20)
        self.assertTrue(0.0 <= manifest['evaluation']['f_measure'] <= 1.0)
        self.assertTrue((output / 'evaluation' / 'scores.csv').is_file())
        checkpoint = load_checkpoint(output / 'checkpoint.json')
        self.assertEqual(checkpoint.net1.checksum(), manifest['checksums']['net1'])

    def test_runs_are_byte_identical(self):
        first, second = self.root / 'first', self.root / 'second'
        self._train(first, seed=3, threads=1)
        self._train(second, seed=3, threads=1)
        self.assertEqual((first / 'manifest.json').read_bytes(), (second / 'manifest.json').read_bytes())
        for mask in sorted((first / 'masks').glob('*.png')):
            self.assertEqual(mask.read_bytes(), (second / 'masks' / mask.name).read_bytes())

    def test_online_run_from_checkpoint(self):
        pretrained = self.root / 'pretrained'
        self._train(pretrained)
        output = self.root / 'online'
        self._train(output, mode='online', checkpoint=str(pretrained / 'checkpoint.json'), online_iterations=3)
        manifest = json.loads((output / 'manifest.json').read_text())
        self.assertNotIn('pretrain', manifest)
        self.assertEqual(manifest['online']['frames'], 20)
        self.assertTrue(manifest['online']['weights_unchanged'])
        self.assertEqual(len(manifest['online']['streams']), 2)

    def test_invalid_dataset_path_is_usage_error(self):
        output = self.root / 'never'
        with self.assertRaises(CommandError) as raised:
            call_command('train', str(self.root / 'missing'), output=str(output))
        self.assertEqual(raised.exception.returncode, EXIT_USAGE_ERROR)
        self.assertFalse(output.exists())

    def test_invalid_config_value_is_usage_error(self):
        output = self.root / 'never'
        with self.assertRaises(CommandError) as raised:
            self._train(output, pretrain_fraction=1.5)
        self.assertEqual(raised.exception.returncode, EXIT_USAGE_ERROR)
        self.assertFalse(output.exists())

    def test_unmatched_ground_truth_fails_before_writing(self):
        masks = sorted((self.dataset / 'groundtruth').glob('*.png'))
        masks[-1].unlink()
        output = self.root / 'never'
        with self.assertRaises(CommandError) as raised:
            self._train(output, evaluate=True)
        self.assertEqual(raised.exception.returncode, EXIT_RUNTIME_FAILURE)
        self.assertIn('Frame sets differ', str(raised.exception))
        self.assertFalse(output.exists())


class OnlineSplitCommandTest(SimpleTestCase):

    def test_default_split_of_hundred_frames(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            spec = root / 'scene.json'
            spec.write_text(json.dumps({'width': 6, 'height': 6, 'n_frames': 100}))
            call_command('synth', str(root / 'dataset'), spec=str(spec))
            call_command('train', str(root / 'dataset'), output=str(root / 'run'), mode='online',
                         epochs=2, online_iterations=2, theta=0.0)
            manifest = json.loads((root / 'run' / 'manifest.json').read_text())
        self.assertEqual(manifest['pretrain']['frames'], 50)
        self.assertEqual(manifest['online']['frames'], 50)
        self.assertEqual([s['frames'] for s in manifest['online']['streams']], [10] * 5)
        self.assertEqual(manifest['online']['streams'][0]['first_frame'], 'in000051')


class DecomposeCommandTest(SimpleTestCase):

    def test_applies_checkpoint_with_frozen_networks(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            call_command('synth', str(root / 'dataset'), preset='minimal')
            call_command('train', str(root / 'dataset'), output=str(root / 'run'), epochs=5, theta=0.5)
            call_command('decompose', str(root / 'dataset'), checkpoint=str(root / 'run' / 'checkpoint.json'),
                         output=str(root / 'applied'), online_iterations=3)
            trained = json.loads((root / 'run' / 'manifest.json').read_text())
            applied = json.loads((root / 'applied' / 'manifest.json').read_text())
            masks = list((root / 'applied' / 'masks').glob('*.png'))
            updated = load_checkpoint(root / 'applied' / 'checkpoint.json')
        self.assertEqual(applied['checksums'], trained['checksums'])
        self.assertEqual(len(masks), 20)
        self.assertEqual(applied['config']['online_iterations'], 3)
        self.assertGreater(updated.threshold_state.count, 0)

    def test_missing_checkpoint_is_usage_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            call_command('synth', str(root / 'dataset'), preset='minimal')
            with self.assertRaises(CommandError) as raised:
                call_command('decompose', str(root / 'dataset'), checkpoint=str(root / 'none.json'),
                             output=str(root / 'out'))
        self.assertEqual(raised.exception.returncode, EXIT_USAGE_ERROR)


@skipUnless(settings.NUMOD_SLOW_TESTS, 'acceptance-scale run; set NUMOD_SLOW_TESTS=True')
class StandardFixtureTest(SimpleTestCase):
    """64x64, 100 frames: moving object, gain ramp over frames 30-70, moving soft shadow"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.sequence, cls.masks, _ = generate(standard_fixture_config())
        cls.invariants = invariants_of(cls.sequence)
        cls.config = TrainConfig(seed=0)

    def test_batch_accuracy(self):
        result = DecompositionService(self.config).train_batch(self.sequence, self.invariants)
        predicted = result.masks()
        scores = [confusion(predicted[i], self.masks.masks[i]) for i in range(len(self.sequence))]
        f_values = [s.f_measure for s in scores if s.defined]
        self.assertGreaterEqual(float(np.mean(f_values)), 0.90)
        for i in range(30, 71):
            self.assertLess(scores[i].fp / self.masks.masks[i].size, 0.05, f"frame {i}")
        for frame, decomposition in zip(self.sequence.frames, result.decompositions):
            self.assertLessEqual(np.max(np.abs(frame.data - decomposition.reconstruction())), 1e-12)

    def test_online_accuracy(self):
        service = DecompositionService(self.config)
        pretrain = service.train_batch(self.sequence.subset(0, 50), self.invariants[:50])
        before = (pretrain.net1.checksum(), pretrain.net2.checksum())
        result = service.train_online(pretrain.net1, pretrain.net2, self.sequence.subset(50, 100),
                                      self.invariants[50:], pretrain.last_latents, pretrain.threshold_state)
        self.assertEqual((result.net1.checksum(), result.net2.checksum()), before)
        scores = [confusion(d.mask, truth) for d, truth in zip(result.decompositions, self.masks.masks[50:])]
        f_values = [s.f_measure for s in scores if s.defined]
        self.assertGreaterEqual(float(np.mean(f_values)), 0.85)


# Published batch F-measure on Backdoor
BACKDOOR_F_MEASURE = 0.8536


@skipUnless(settings.NUMOD_CDNET_BACKDOOR, 'CDnet Backdoor sequence not configured (NUMOD_CDNET_BACKDOOR)')
class CdnetBackdoorTest(SimpleTestCase):

    def test_batch_f_measure(self):
        root = Path(settings.NUMOD_CDNET_BACKDOOR)
        sequence = load_sequence(root / 'input', '*.jpg', max_side=160)
        ground_truth = load_masks(root / 'groundtruth', '*.png', max_side=160, exclude_unknown=True)
        config = TrainConfig(seed=0)
        model = InvariantModel(theta=InvariantTransformer.calibrate_direction(sequence))
        result = DecompositionService(config).train_batch(
            sequence, InvariantTransformer.psi_sequence(sequence, model))
        predicted = mask_sequence(result.decompositions, sequence.width, sequence.height)
        _, summary = evaluate_masks(predicted, ground_truth, intersect=True)
        self.assertLessEqual(abs(summary['f_measure'] - BACKDOOR_F_MEASURE), 0.10)
