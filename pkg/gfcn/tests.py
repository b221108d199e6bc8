import json

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.utils import DimensionMismatchError
from .models import GfcnParams, AdamState
from .serializers import NetworkStateSerializer
from .utils import gfcn_forward, gfcn_backward, init_params, adam_step


def random_params(rng, latent_dim, output_dim, hidden_sizes=(10, 20)):
    """Random weights and nonzero biases"""
    shapes = GfcnParams.shapes(latent_dim, hidden_sizes, output_dim)
    return GfcnParams(**{name: rng.normal(0.0, 0.7, size=shape) for name, shape in shapes.items()})


def central_difference(f, theta, signature, steps=(1e-5, 1e-7)):
    """
    Central finite differences of f at theta

    A component is retried with the smaller step when an activation or sign
    pattern changes between theta - h and theta + h, and left as NaN when it
    still changes.
    """
    grad = np.full(theta.size, np.nan)
    for k in range(theta.size):
        for h in steps:
            plus, minus = theta.copy(), theta.copy()
            plus[k] += h
            minus[k] -= h
            if signature(plus) == signature(minus):
                grad[k] = (f(plus) - f(minus)) / (2.0 * h)
                break
    return grad


class GfcnForwardTest(SimpleTestCase):

    def test_zero_network_outputs_half(self):
        params = GfcnParams.from_flat(np.zeros(init_params(5, 7, seed=0).size), 5, (10, 20), 7)
        output, _ = gfcn_forward(params, np.random.default_rng(0).normal(size=5))
        np.testing.assert_array_equal(output, np.full(7, 0.5))

    def test_zero_latent_with_zero_biases_outputs_half(self):
        params = init_params(5, 12, seed=3)
        output, cache = gfcn_forward(params, np.zeros(5))
        np.testing.assert_array_equal(cache.h1, np.zeros((1, 10)))
        np.testing.assert_array_equal(output, np.full(12, 0.5))

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(11)
        params = random_params(rng, 5, 12)
        u = rng.normal(size=5)
        output, _ = gfcn_forward(params, u)

        h1 = np.maximum(params.w1.dot(u) + params.b1, 0.0)
        h2 = np.maximum(params.w2.dot(h1) + params.b2, 0.0)
        expected = 1.0 / (1.0 + np.exp(-(params.w3.dot(h2) + params.b3)))
        np.testing.assert_allclose(output, expected, rtol=0, atol=1e-12)

    def test_batch_rows_equal_single_calls(self):
        rng = np.random.default_rng(5)
        params = random_params(rng, 5, 6)
        latents = rng.normal(size=(4, 5))
        batch, _ = gfcn_forward(params, latents)
        for row, u in zip(batch, latents):
            np.testing.assert_allclose(row, gfcn_forward(params, u)[0], rtol=0, atol=1e-12)

    def test_output_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(2)
        params = random_params(rng, 5, 48)
        output, _ = gfcn_forward(params, rng.normal(size=(20, 5)))
        self.assertTrue(np.all(output > 0.0) and np.all(output < 1.0))

    def test_wrong_latent_length(self):
        params = init_params(5, 3, seed=0)
        with self.assertRaises(DimensionMismatchError):
            gfcn_forward(params, np.zeros(4))


class GfcnBackwardTest(SimpleTestCase):

    def test_zero_upstream_gradient(self):
        rng = np.random.default_rng(1)
        params = random_params(rng, 5, 12)
        _, cache = gfcn_forward(params, rng.normal(size=5))
        grads, grad_u = gfcn_backward(params, cache, np.zeros(12))
        np.testing.assert_array_equal(grads.flatten(), np.zeros(params.size))
        np.testing.assert_array_equal(grad_u, np.zeros(5))

    def test_sigmoid_slope_at_zero(self):
        params = GfcnParams.from_flat(np.zeros(init_params(5, 4, seed=0).size), 5, (10, 20), 4)
        _, cache = gfcn_forward(params, np.ones(5))
        upstream = np.array([1.0, -2.0, 0.5, 4.0])
        grads, _ = gfcn_backward(params, cache, upstream)
        np.testing.assert_array_equal(grads.b3, 0.25 * upstream)

    def test_frozen_parameters_skip_gradients(self):
        params = init_params(5, 3, seed=0)
        _, cache = gfcn_forward(params, np.ones(5))
        grads, grad_u = gfcn_backward(params, cache, np.ones(3), compute_param_grads=False)
        self.assertIsNone(grads)
        self.assertEqual(grad_u.shape, (5,))

    def test_upstream_shape_mismatch(self):
        params = init_params(5, 3, seed=0)
        _, cache = gfcn_forward(params, np.ones(5))
        with self.assertRaises(DimensionMismatchError):
            gfcn_backward(params, cache, np.ones(4))

    def test_gradients_match_finite_differences(self):
        """100 random instances, d=5, m in {3, 12, 48}, every component"""
        rng = np.random.default_rng(20240)
        for instance in range(100):
            m = (3, 12, 48)[instance % 3]
            params = random_params(rng, 5, m)
            u = rng.normal(size=5)
            upstream = rng.normal(size=m)
            split = params.size

            def objective(theta):
                output, _ = gfcn_forward(params.unflatten_like(theta[:split]), theta[split:])
                return float(np.sum(output * upstream))

            def signature(theta):
                _, cache = gfcn_forward(params.unflatten_like(theta[:split]), theta[split:])
                return np.concatenate([cache.z1 > 0, cache.z2 > 0], axis=1).tobytes()

            _, cache = gfcn_forward(params, u)
            grads, grad_u = gfcn_backward(params, cache, upstream)
            analytic = np.concatenate([grads.flatten(), grad_u])
            numeric = central_difference(objective, np.concatenate([params.flatten(), u]), signature)

            checked = ~np.isnan(numeric)
            self.assertGreater(checked.mean(), 0.9)
            np.testing.assert_allclose(analytic[checked], numeric[checked], rtol=1e-4, atol=1e-6,
                                       err_msg=f"instance {instance} (m={m})")


class AdamStepTest(SimpleTestCase):

    def test_zero_gradient_is_fixed_point(self):
        params = np.random.default_rng(0).normal(size=8)
        new_params, state = adam_step(AdamState.fresh(8), params, np.zeros(8))
        np.testing.assert_array_equal(new_params, params)
        self.assertEqual(state.step_count, 1)

    def test_first_step_moves_by_learning_rate(self):
        rng = np.random.default_rng(1)
        grads = rng.uniform(0.1, 2.0, size=50) * rng.choice([-1.0, 1.0], size=50)
        params = rng.normal(size=50)
        new_params, _ = adam_step(AdamState.fresh(50, lr=0.001), params, grads)
        change = new_params - params
        self.assertTrue(np.all(np.abs(change) >= 0.000999))
        self.assertTrue(np.all(np.abs(change) <= 0.001))
        np.testing.assert_array_equal(np.sign(change), -np.sign(grads))

    def test_constant_positive_gradient_decreases_each_step(self):
        params = np.array([1.0, -3.0])
        grads = np.array([0.5, 2.0])
        state = AdamState.fresh(2)
        first, state = adam_step(state, params, grads)
        second, state = adam_step(state, first, grads)
        self.assertTrue(np.all(first < params))
        self.assertTrue(np.all(second < first))
        self.assertEqual(state.step_count, 2)

    def test_inputs_are_not_modified(self):
        params, grads = np.ones(3), np.ones(3)
        state = AdamState.fresh(3)
        adam_step(state, params, grads)
        np.testing.assert_array_equal(params, np.ones(3))
        self.assertEqual(state.step_count, 0)
        np.testing.assert_array_equal(state.first_moment, np.zeros(3))

    def test_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            adam_step(AdamState.fresh(3), np.zeros(3), np.zeros(4))

    def test_state_validation(self):
        with self.assertRaises(ValidationError):
            AdamState(step_count=0, first_moment=np.zeros(2), second_moment=-np.ones(2))
        with self.assertRaises(ValidationError):
            AdamState(step_count=0, first_moment=np.zeros(2), second_moment=np.zeros(3))


class InitParamsTest(SimpleTestCase):

    def test_same_seed_is_bit_identical(self):
        first = init_params(5, 12, seed=42)
        second = init_params(5, 12, seed=42)
        self.assertEqual(first.flatten().tobytes(), second.flatten().tobytes())
        self.assertNotEqual(first.checksum(), init_params(5, 12, seed=43).checksum())

    def test_biases_are_zero(self):
        params = init_params(5, 12, seed=0)
        for bias in (params.b1, params.b2, params.b3):
            np.testing.assert_array_equal(bias, np.zeros_like(bias))

    def test_glorot_bounds(self):
        params = init_params(5, 30, seed=9)
        limit = np.sqrt(6.0 / 15.0)
        self.assertAlmostEqual(limit, 0.6325, places=4)
        self.assertTrue(np.all(np.abs(params.w1) < limit))
        self.assertTrue(np.all(np.abs(params.w3) < np.sqrt(6.0 / 50.0)))
        self.assertEqual(params.w1.shape, (10, 5))
        self.assertEqual(params.w3.shape, (30, 20))

    def test_output_bias_sets_starting_image(self):
        start = np.linspace(0.1, 0.9, 12)
        logits = np.log(start / (1.0 - start))
        params = init_params(5, 12, seed=4, output_bias=logits)
        plain = init_params(5, 12, seed=4)
        np.testing.assert_array_equal(params.b3, logits)
        np.testing.assert_array_equal(params.w3, plain.w3)
        zero = GfcnParams(**{**{name: getattr(params, name) for name in ('w1', 'b1', 'w2', 'b2', 'b3')},
                             'w3': np.zeros_like(params.w3)})
        output, _ = gfcn_forward(zero, np.full(5, 0.3))
        np.testing.assert_allclose(output, start, rtol=0, atol=1e-12)

    def test_output_bias_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            init_params(5, 12, seed=0, output_bias=np.zeros(11))


class GfcnParamsTest(SimpleTestCase):

    def test_flat_round_trip(self):
        params = random_params(np.random.default_rng(0), 5, 9)
        restored = params.unflatten_like(params.flatten())
        for original, copy in zip(params.arrays(), restored.arrays()):
            np.testing.assert_array_equal(original, copy)

    def test_rejects_inconsistent_shapes(self):
        with self.assertRaises(ValidationError):
            GfcnParams(w1=np.zeros((10, 5)), b1=np.zeros(10), w2=np.zeros((20, 10)), b2=np.zeros(20),
                       w3=np.zeros((3, 20)), b3=np.zeros(4))

    def test_rejects_non_finite(self):
        flat = np.zeros(init_params(5, 3, seed=0).size)
        flat[0] = np.nan
        with self.assertRaises(ValidationError):
            GfcnParams.from_flat(flat, 5, (10, 20), 3)


class NetworkStateSerializerTest(SimpleTestCase):

    def test_round_trip_through_json(self):
        rng = np.random.default_rng(4)
        params = random_params(rng, 5, 6)
        adam = AdamState(step_count=7, first_moment=rng.normal(size=params.size),
                         second_moment=rng.uniform(size=params.size), lr=0.01)
        payload = json.loads(json.dumps(NetworkStateSerializer.dump(params, adam)))

        serializer = NetworkStateSerializer(data=payload)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        restored, restored_adam = serializer.save()
        np.testing.assert_array_equal(restored.flatten(), params.flatten())
        np.testing.assert_array_equal(restored_adam.second_moment, adam.second_moment)
        self.assertEqual(restored_adam.step_count, 7)
        self.assertEqual(restored_adam.lr, 0.01)

    def test_rejects_wrong_parameter_count(self):
        payload = NetworkStateSerializer.dump(init_params(5, 3, seed=0))
        payload['params'] = payload['params'][:-1]
        self.assertFalse(NetworkStateSerializer(data=payload).is_valid())

    def test_rejects_non_numeric_parameters(self):
        payload = NetworkStateSerializer.dump(init_params(5, 3, seed=0))
        payload['params'][0] = 'x'
        self.assertFalse(NetworkStateSerializer(data=payload).is_valid())
