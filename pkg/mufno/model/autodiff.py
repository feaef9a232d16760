"""Relative L2 loss and hand-written reverse mode for the fixed FNO graph."""
from __future__ import annotations

import numpy as np

from mufno.errors import DegenerateTargetError, SizeError
from mufno.model.fno import forward
from mufno.model.params import FnoConfig, Gradients, ModelParams
from mufno.model.spectral import spectral_conv_backward
from mufno.numerics.activations import get_activation


def _per_sample_norms(pred: np.ndarray, target: np.ndarray):
    if pred.shape != target.shape:
        raise SizeError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    batch = pred.shape[0]
    residual = (pred - target).reshape(batch, -1)
    t_norm = np.sqrt(np.sum(target.reshape(batch, -1) ** 2, axis=1))
    if np.any(t_norm == 0):
        bad = int(np.flatnonzero(t_norm == 0)[0])
        raise DegenerateTargetError(f"target sample {bad} has zero norm")
    r_norm = np.sqrt(np.sum(residual**2, axis=1))
    return r_norm, t_norm


def per_sample_relative_l2(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """||pred_b - target_b|| / ||target_b|| for every batch item."""
    r_norm, t_norm = _per_sample_norms(pred, target)
    return r_norm / t_norm


def relative_l2_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over the batch of the relative L2 error.

    Raises:
        DegenerateTargetError: If any target sample has zero norm.
    """
    return float(np.mean(per_sample_relative_l2(pred, target)))


def relative_l2_grad(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Return the loss and d loss / d pred.

    The gradient of a sample is defined as 0 where its residual is exactly 0.
    """
    r_norm, t_norm = _per_sample_norms(pred, target)
    loss = float(np.mean(r_norm / t_norm))
    batch = pred.shape[0]
    denom = r_norm * t_norm * batch
    scale = np.divide(1.0, denom, out=np.zeros_like(denom), where=r_norm > 0)
    grad = (pred - target) * scale.reshape((batch,) + (1,) * (pred.ndim - 1))
    return loss, grad


def backward(
    params: ModelParams,
    config: FnoConfig,
    inputs: np.ndarray,
    targets: np.ndarray,
) -> tuple[float, Gradients]:
    """Loss and exact gradients of relative_l2_loss o forward.

    Raises:
        NumericDivergenceError: If any gradient tensor holds NaN or Inf; the
            error names that tensor.
    """
    act = get_activation(config.activation)
    out, cache = forward(params, config, inputs, cache=True)
    loss, g_out = relative_l2_grad(out, targets)

    grads: dict[str, np.ndarray] = {}
    grads["Q.1.weight"] = np.einsum("bnc,bno->co", cache.g, g_out)
    grads["Q.1.bias"] = g_out.sum(axis=(0, 1))
    g_q = (g_out @ params.Q1_weight.T) * act.prime(cache.q)
    grads["Q.0.weight"] = np.einsum("bnc,bno->co", cache.h[-1], g_q)
    grads["Q.0.bias"] = g_q.sum(axis=(0, 1))
    g_h = g_q @ params.Q0_weight.T

    for layer in reversed(range(config.L)):
        h_prev = cache.h[layer]
        g_w = g_h * act.prime(cache.w[layer])
        grads[f"layers.{layer}.W.weight"] = np.einsum("bnc,bno->co", h_prev, g_w)
        grads[f"layers.{layer}.W.bias"] = g_w.sum(axis=(0, 1))
        g_r, g_spec = spectral_conv_backward(
            params.spectral[layer], cache.spectra[layer], g_w
        )
        grads[f"layers.{layer}.R"] = g_r
        g_h = g_w @ params.W_weight[layer].T + g_spec

    grads["P.weight"] = np.einsum("bnc,bno->co", cache.x, g_h)
    grads["P.bias"] = g_h.sum(axis=(0, 1))

    ordered = Gradients({name: grads[name] for name, _, _ in params.flat_items()})
    ordered.finite_check()
    return loss, ordered
