"""Pseudo-spectral solver for u_t + (u^2/2)_x = nu u_xx with periodic BCs.

Diffusion is integrated exactly per mode (integrating factor) and the
nonlinear flux is advanced with classical RK4. Quadratic products are
dealiased with the 2/3 rule.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from mufno.errors import SizeError, SolverDivergenceError
from mufno.numerics.fft import irfft, is_power_of_two, rfft

_log = logging.getLogger(__name__)

GROWTH_LIMIT = 10.0
RK4_STABILITY_LIMIT = 2.8


def _wavenumbers(n: int, domain_length: float) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n // 2 + 1) / domain_length


def _dealias_mask(n: int) -> np.ndarray:
    k = np.arange(n // 2 + 1)
    return (k <= n // 3).astype(np.float64)


def _effective_wavenumber(
    kappa: np.ndarray, nu: float, dt: float, n: int
) -> float:
    """Largest advective wavenumber left after one step of viscous damping."""
    kept = kappa * _dealias_mask(n)
    return float(np.max(kept * np.exp(-nu * kept**2 * dt)))


def _first_bad_row(norms: np.ndarray, reference: np.ndarray) -> int:
    bad = ~np.isfinite(norms) | (norms > GROWTH_LIMIT * np.maximum(reference, 1e-300))
    return int(np.flatnonzero(bad)[0])


def solve_burgers(
    u0: np.ndarray,
    nu: float,
    T: float,
    steps: int = 2000,
    *,
    domain_length: float = 1.0,
    nonlinear: bool = True,
    checkpoints: int = 10,
) -> np.ndarray:
    """Advance *u0* ([n] or [batch, n]) to time T and return u(., T).

    The norm of every sample is checked at *checkpoints* evenly spaced times;
    growth above 10x between two checks, or a NaN, aborts the solve.

    Raises:
        SizeError: If n is not a power of two.
        SolverDivergenceError: If the CFL-style check fails up front or the
            solution blows up; ``sample_index`` names the batch row.
    """
    u0 = np.asarray(u0, dtype=np.float64)
    single = u0.ndim == 1
    u = u0[None, :] if single else u0
    n = u.shape[-1]
    if n < 4 or not is_power_of_two(n):
        raise SizeError(f"solver grid must be a power of two >= 4, got {n}")
    if not nu > 0 or not T > 0 or steps < 1:
        raise ValueError("need nu > 0, T > 0 and steps >= 1")

    dt = T / steps
    kappa = _wavenumbers(n, domain_length)
    if nonlinear:
        rate = _effective_wavenumber(kappa, nu, dt, n)
        courant = np.max(np.abs(u), axis=-1) * dt * rate
        if np.any(courant > RK4_STABILITY_LIMIT):
            row = int(np.argmax(courant))
            raise SolverDivergenceError(
                f"CFL check failed: advective number {courant[row]:.3g} exceeds "
                f"{RK4_STABILITY_LIMIT}; increase steps",
                sample_index=row,
            )

    decay = np.exp(-nu * kappa**2 * dt)
    half_decay = np.exp(-nu * kappa**2 * dt / 2.0)
    mask = _dealias_mask(n)
    flux_factor = -0.5j * kappa

    def flux(v_hat: np.ndarray) -> np.ndarray:
        if not nonlinear:
            return np.zeros_like(v_hat)
        v = irfft(v_hat * mask, n, axis=-1)
        return flux_factor * mask * rfft(v * v, axis=-1)

    u_hat = rfft(u, axis=-1)
    every = max(1, steps // max(1, checkpoints))
    last_norm = np.sqrt(np.sum(u * u, axis=-1))
    for step in range(1, steps + 1):
        a = flux(u_hat)
        b = flux(half_decay * (u_hat + 0.5 * dt * a))
        c = flux(half_decay * u_hat + 0.5 * dt * b)
        d = flux(decay * u_hat + dt * half_decay * c)
        u_hat = decay * u_hat + (dt / 6.0) * (
            decay * a + 2.0 * half_decay * (b + c) + d
        )
        if step % every == 0 or step == steps:
            norm = np.sqrt(np.sum(irfft(u_hat, n, axis=-1) ** 2, axis=-1))
            if not np.all(np.isfinite(norm)) or np.any(norm > GROWTH_LIMIT * last_norm):
                row = _first_bad_row(norm, last_norm)
                raise SolverDivergenceError(
                    f"solution norm blew up at step {step}/{steps}", sample_index=row
                )
            last_norm = norm

    out = irfft(u_hat, n, axis=-1)
    return out[0] if single else out
