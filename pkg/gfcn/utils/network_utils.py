"""
Forward pass, analytic backward pass and initialization of the generative
fully connected network: sigmoid(W3 relu(W2 relu(W1 u + b1) + b2) + b3)
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from common.utils import DimensionMismatchError, check_same_shape
from ..models import GfcnParams, ForwardCache

logger = logging.getLogger(__name__)


def _as_batch(u: np.ndarray, latent_dim: int) -> Tuple[np.ndarray, bool]:
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    batch = u[np.newaxis, :] if single else u
    if batch.ndim != 2 or batch.shape[1] != latent_dim:
        raise DimensionMismatchError(
            f"Latent input has shape {u.shape}, network expects length {latent_dim}",
            details={'latent_dim': latent_dim}
        )
    return batch, single


def gfcn_forward(params: GfcnParams, u: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Evaluate the network

    Args:
        params: Network parameters
        u: Latent vector (d,) or stack of latents (n, d)

    Returns:
        (output, cache): output has shape (m,) or (n, m), strictly in (0, 1)
    """
    batch, single = _as_batch(u, params.latent_dim)
    z1 = batch @ params.w1.T + params.b1
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ params.w2.T + params.b2
    h2 = np.maximum(z2, 0.0)
    z3 = h2 @ params.w3.T + params.b3
    output = expit(z3)
    cache = ForwardCache(u=batch, z1=z1, h1=h1, z2=z2, h2=h2, z3=z3, output=output, single=single)
    return (output[0] if single else output), cache


def gfcn_backward(
    params: GfcnParams,
    cache: ForwardCache,
    grad_output: np.ndarray,
    compute_param_grads: bool = True
) -> Tuple[Optional[GfcnParams], np.ndarray]:
    """
    Gradients of sum(output * grad_output) through the network

    ReLU'(0) is taken as 0. Parameter gradients are summed over the batch
    by matrix products, so their reduction order is fixed.

    Args:
        params: Parameters used in the forward call
        cache: Cache from that forward call
        grad_output: Upstream gradient, same shape as the forward output
        compute_param_grads: False skips the parameter gradients (frozen nets)

    Returns:
        (grad_params, grad_u): grad_params is None when skipped; grad_u has
        the shape of the forward call's u
    """
    grad = np.asarray(grad_output, dtype=np.float64)
    if cache.single:
        grad = grad[np.newaxis, :] if grad.ndim == 1 else grad
    if grad.shape != cache.output.shape:
        raise DimensionMismatchError(
            f"Output gradient has shape {np.shape(grad_output)}, expected {cache.output.shape}"
        )

    g3 = grad * cache.output * (1.0 - cache.output)
    g2 = (g3 @ params.w3) * (cache.z2 > 0.0)
    g1 = (g2 @ params.w2) * (cache.z1 > 0.0)
    grad_u = g1 @ params.w1

    grad_params = None
    if compute_param_grads:
        grad_params = GfcnParams(
            w1=g1.T @ cache.u, b1=g1.sum(axis=0),
            w2=g2.T @ cache.h1, b2=g2.sum(axis=0),
            w3=g3.T @ cache.h2, b3=g3.sum(axis=0),
        )
    return grad_params, (grad_u[0] if cache.single else grad_u)


def init_params(
    latent_dim: int,
    output_dim: int,
    seed: int,
    hidden_sizes: Tuple[int, int] = (10, 20),
    output_bias: Optional[np.ndarray] = None
) -> GfcnParams:
    """
    Glorot-uniform weights, zero biases, deterministic in seed

    Each weight matrix is drawn from uniform(-s, s) with
    s = sqrt(6 / (fan_in + fan_out)). output_bias, when given, replaces the
    zero output-layer bias (logits of a starting image).
    """
    if latent_dim < 1 or output_dim < 1:
        raise DimensionMismatchError(
            f"Latent and output sizes must be >= 1, got {latent_dim} and {output_dim}"
        )
    rng = np.random.default_rng(seed)
    shapes = GfcnParams.shapes(latent_dim, tuple(hidden_sizes), output_dim)
    arrays = {}
    for name, shape in shapes.items():
        if name.startswith('w'):
            fan_out, fan_in = shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            arrays[name] = rng.uniform(-limit, limit, size=shape)
        else:
            arrays[name] = np.zeros(shape)
    if output_bias is not None:
        output_bias = np.asarray(output_bias, dtype=np.float64).reshape(-1)
        check_same_shape('output bias', shapes['b3'], output_bias.shape)
        arrays['b3'] = output_bias.copy()
    logger.debug(f"Initialized GFCN {latent_dim}->{hidden_sizes}->{output_dim} (seed {seed})")
    return GfcnParams(**arrays)
