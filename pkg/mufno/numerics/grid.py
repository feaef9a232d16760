"""Uniform periodic 1D grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mufno.errors import SizeError
from mufno.numerics.fft import is_power_of_two


@dataclass(frozen=True)
class Grid1D:
    """n uniform points x_j = j * domain_length / n on a periodic interval."""

    n: int
    domain_length: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 4 or not is_power_of_two(self.n):
            raise SizeError(f"grid size must be a power of two >= 4, got {self.n}")
        if not self.domain_length > 0:
            raise SizeError(f"domain_length must be positive, got {self.domain_length}")

    @property
    def spacing(self) -> float:
        return self.domain_length / self.n

    @property
    def max_modes(self) -> int:
        """Largest K the spectral convolution accepts on this grid."""
        return self.n // 2

    def points(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def downsample(self, factor: int) -> "Grid1D":
        """Return the grid obtained by keeping every *factor*-th point."""
        if factor < 1 or self.n % factor:
            raise SizeError(f"cannot downsample n={self.n} by {factor}")
        return Grid1D(self.n // factor, self.domain_length)
