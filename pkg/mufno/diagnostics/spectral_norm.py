"""Spectral norm of the Fourier integral operator by block power iteration."""
from __future__ import annotations

import logging

import numpy as np

from mufno.errors import ConvergenceError, SizeError, TruncationError
from mufno.model.params import SpectralConvParams
from mufno.model.spectral import dense_operator
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng

_log = logging.getLogger(__name__)

TOLERANCE = 1e-10
MAX_ITERATIONS = 10_000
BLOCK_SIZE = 16


def power_iteration(
    matrix: np.ndarray,
    *,
    tol: float = TOLERANCE,
    max_iter: int = MAX_ITERATIONS,
    block: int = BLOCK_SIZE,
    seed: int = 0,
) -> float:
    """Largest singular value of *matrix* from block power iteration on A^T A.

    Each sweep multiplies an orthonormal block by A^T A, re-orthonormalizes
    it and takes the top Rayleigh-Ritz value. Iteration stops once the top
    Ritz pair's residual falls below tol * value.

    Raises:
        ConvergenceError: If *max_iter* sweeps do not reach *tol*; carries
            the last relative residual.
    """
    cols = matrix.shape[1]
    p = min(block, cols)
    start = SeededRng(seed).substream("power-iteration").normal((cols, p))
    X, _ = np.linalg.qr(start)
    residual = np.inf
    for _ in range(max_iter):
        Y = matrix.T @ (matrix @ X)
        H = X.T @ Y
        values, vectors = np.linalg.eigh(0.5 * (H + H.T))
        top, v = values[-1], vectors[:, -1]
        scale = max(top, float(np.linalg.norm(Y)))
        if scale == 0.0:
            return 0.0
        residual = float(np.linalg.norm(Y @ v - top * (X @ v))) / scale
        if residual < tol:
            return float(np.sqrt(max(top, 0.0)))
        X, _ = np.linalg.qr(Y)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} sweeps "
        f"(relative residual {residual:.3e})",
        residual=residual,
    )


def spectral_norm_exact(params: SpectralConvParams, grid: Grid1D) -> float:
    """Operator 2-norm of the spectral convolution on *grid*.

    The dense matrix is assembled by applying the operator to unit vectors;
    its norm equals max_k sigma_max(R_k).

    Raises:
        TruncationError: If K > n/2.
        ConvergenceError: If power iteration stalls.
    """
    if params.K > grid.max_modes:
        raise TruncationError(f"K={params.K} exceeds n/2={grid.max_modes}")
    if grid.n * params.m > 4096:
        raise SizeError("dense assembly is limited to n * m <= 4096")
    norm = power_iteration(dense_operator(params, grid.n))
    _log.debug("spectral norm at K=%d, n=%d: %.12g", params.K, grid.n, norm)
    return norm


def max_mode_norm(params: SpectralConvParams) -> float:
    """max_k sigma_max(R_k), the closed form the dense norm should match."""
    R = params.R.real.astype(np.complex128) if params.real_r_mode else params.R.copy()
    R[0] = R[0].real
    return float(max(np.linalg.norm(R[k], ord=2) for k in range(params.K)))
