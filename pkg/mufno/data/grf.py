"""Periodic Gaussian random fields for Burgers initial conditions."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from pydantic import ConfigDict, model_validator
from pydantic.dataclasses import dataclass

from mufno.numerics.fft import irfft
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng


@dataclass(frozen=True, config=ConfigDict(extra="forbid"))
class GrfParams:
    """N(0, sigma^2 (-Laplacian + tau^2)^-alpha) on the unit-length torus.

    ``sigma=None`` picks the amplitude that gives unit pointwise variance on
    the grid the field is sampled on.
    """

    tau: float = 5.0
    alpha: float = 2.0
    sigma: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "GrfParams":
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        return self


def spectral_density(params: GrfParams, grid: Grid1D, sigma: float = 1.0) -> np.ndarray:
    """Density of every rfft bin 0..n/2; bin 0 is zero (zero-mean field)."""
    k = np.arange(grid.n // 2 + 1) / grid.domain_length
    density = sigma**2 * (4.0 * math.pi**2 * k**2 + params.tau**2) ** (-params.alpha)
    density[0] = 0.0
    return density


def pointwise_variance(params: GrfParams, grid: Grid1D) -> float:
    """Variance of u(x) for any fixed x: the density summed over k = -n/2+1..n/2."""
    density = spectral_density(params, grid, resolve_sigma(params, grid))
    return float(2.0 * density[1:-1].sum() + density[-1])


def resolve_sigma(params: GrfParams, grid: Grid1D) -> float:
    if params.sigma is not None:
        return params.sigma
    unit = spectral_density(params, grid)
    return 1.0 / math.sqrt(2.0 * unit[1:-1].sum() + unit[-1])


def sample_grf(
    params: GrfParams, grid: Grid1D, rng: SeededRng, count: Optional[int] = None
) -> np.ndarray:
    """Draw one field [n] (or *count* fields [count, n]) from *rng*.

    Fourier coefficients are complex Gaussians on bins 1..n/2-1 and real on
    the Nyquist bin, so conjugate symmetry gives a real field.
    """
    n = grid.n
    half = n // 2
    density = spectral_density(params, grid, resolve_sigma(params, grid))
    shape = (half + 1,) if count is None else (count, half + 1)
    re = rng.substream("re").normal(shape)
    im = rng.substream("im").normal(shape)
    amp = np.sqrt(density / 2.0)
    coeff = amp * (re + 1j * im)
    coeff[..., half] = np.sqrt(density[half]) * re[..., half]
    coeff[..., 0] = 0.0
    return irfft(n * coeff, n, axis=-1)
