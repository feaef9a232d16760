"""The Fourier-space integral operator and its adjoint.

Layout is channels-last: v has shape [..., n, m]. Bins 0..K-1 of the rfft are
kept, each multiplied by its own m x m complex matrix R_k, and the rest are
zeroed before the inverse transform.
"""
from __future__ import annotations

import numpy as np

from mufno.errors import SizeError, TruncationError
from mufno.model.params import SpectralConvParams
from mufno.numerics.fft import irfft, rfft


def _check(params: SpectralConvParams, v: np.ndarray) -> int:
    if v.ndim < 2:
        raise SizeError(f"expected [..., n, m], got shape {v.shape}")
    n, m = v.shape[-2], v.shape[-1]
    if m != params.m:
        raise SizeError(f"channel mismatch: input has {m}, weights expect {params.m}")
    if params.K > n // 2:
        raise TruncationError(f"K={params.K} exceeds n/2={n // 2}")
    return n


def _effective_weight(params: SpectralConvParams) -> np.ndarray:
    R = params.R
    if params.real_r_mode:
        return R.real.astype(np.complex128)
    return R


def spectral_conv_apply(
    params: SpectralConvParams, v: np.ndarray, *, return_spectrum: bool = False
):
    """Apply F^-1[R . T_K(F v)] along the grid axis.

    With *return_spectrum* the truncated input spectrum [..., K, m] is
    returned as well, for reuse by the backward pass.

    Raises:
        TruncationError: If K > n/2.
        SizeError: If the channel count does not match the weights.
    """
    n = _check(params, v)
    K = params.K
    V = rfft(v, axis=-2)[..., :K, :]
    Y = np.zeros(v.shape[:-2] + (n // 2 + 1, params.m), dtype=np.complex128)
    Y[..., :K, :] = np.einsum("...ki,kio->...ko", V, _effective_weight(params))
    out = irfft(Y, n, axis=-2)
    if return_spectrum:
        return out, V
    return out


def _irfft_adjoint_weights(n: int, K: int) -> np.ndarray:
    c = np.full(K, 2.0 / n)
    c[0] = 1.0 / n
    return c


def _rfft_adjoint_weights(n: int) -> np.ndarray:
    d = np.full(n // 2 + 1, 0.5)
    d[0] = 1.0
    d[-1] = 1.0
    return d


def spectral_conv_backward(
    params: SpectralConvParams, V: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Return (grad_r, grad_v) for upstream gradient *grad_out* [B, n, m].

    *V* is the truncated input spectrum saved by the forward pass. Complex
    gradients follow grad = d/d(re) + i d/d(im); in real_r_mode the
    imaginary part of grad_r is exactly zero.
    """
    n = grad_out.shape[-2]
    K = params.K
    gY = rfft(grad_out, axis=-2)[..., :K, :] * _irfft_adjoint_weights(n, K)[:, None]

    gR = np.einsum("bki,bko->kio", np.conj(V), gY)
    grad_r = params.a_scale * gR
    if params.real_r_mode:
        grad_r = grad_r.real.astype(np.complex128)

    gV = np.zeros(grad_out.shape[:-2] + (n // 2 + 1, params.m), dtype=np.complex128)
    gV[..., :K, :] = np.einsum("bko,kio->bki", gY, np.conj(_effective_weight(params)))
    grad_v = n * irfft(gV * _rfft_adjoint_weights(n)[:, None], n, axis=-2)
    return grad_r, grad_v


def dense_operator(params: SpectralConvParams, n: int) -> np.ndarray:
    """Assemble the (n m) x (n m) matrix of the operator column by column.

    Column j is the flattened response to the j-th unit input of shape
    [n, m]; for m = 1 this is the plain n x n matrix.
    """
    size = n * params.m
    basis = np.eye(size).reshape(size, n, params.m)
    cols = spectral_conv_apply(params, basis).reshape(size, size)
    return cols.T
