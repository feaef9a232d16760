"""Iterative radix-2 FFT and the real-to-complex transform pair built on it.

Conventions: the forward transform is unnormalized, the inverse carries 1/n.
Only power-of-two lengths are supported.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from mufno.errors import SizeError


def is_power_of_two(n: int) -> bool:
    """Return True if *n* is a positive power of two."""
    return n >= 1 and (n & (n - 1)) == 0


def _require_power_of_two(n: int, what: str = "length") -> None:
    if not is_power_of_two(n):
        raise SizeError(f"FFT {what} must be a power of two, got {n}")


# ---------------------------------------------------------------------------
# Precomputed tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=128)
def _stage_twiddles(n: int, inverse: bool) -> tuple[np.ndarray, ...]:
    sign = 1.0 if inverse else -1.0
    stages = []
    size = 2
    while size <= n:
        half = size // 2
        stages.append(np.exp(sign * 2j * np.pi * np.arange(half) / size))
        size *= 2
    return tuple(stages)


@lru_cache(maxsize=64)
def _real_twiddles(n: int, inverse: bool) -> np.ndarray:
    half = n // 2
    sign = 1.0 if inverse else -1.0
    count = half + 1 if not inverse else half
    return np.exp(sign * 2j * np.pi * np.arange(count) / n)


# ---------------------------------------------------------------------------
# Complex transform
# ---------------------------------------------------------------------------

def _fft_last(x: np.ndarray, inverse: bool) -> np.ndarray:
    """Radix-2 decimation-in-time FFT along the last axis (no normalization)."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    out = np.asarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    size = 2
    for twiddle in _stage_twiddles(n, inverse):
        half = size // 2
        blocks = out.reshape(*lead, n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        out = np.concatenate((even + odd, even - odd), axis=-1)
        size *= 2
    return out.reshape(*lead, n)


def fft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized forward DFT of a complex array along *axis*."""
    x = np.moveaxis(np.asarray(x, dtype=np.complex128), axis, -1)
    _require_power_of_two(x.shape[-1])
    return np.moveaxis(_fft_last(x, inverse=False), -1, axis)


def ifft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse DFT (with 1/n) of a complex array along *axis*."""
    x = np.moveaxis(np.asarray(x, dtype=np.complex128), axis, -1)
    n = x.shape[-1]
    _require_power_of_two(n)
    return np.moveaxis(_fft_last(x, inverse=True) / n, -1, axis)


# ---------------------------------------------------------------------------
# Real transform pair
# ---------------------------------------------------------------------------

def rfft(signal: np.ndarray, axis: int = -1) -> np.ndarray:
    """Forward DFT of a real signal, non-negative bins 0..n/2 only.

    The even and odd samples are packed into one complex sequence of length
    n/2, transformed once, then split back into the two half spectra.

    Raises:
        SizeError: If the transform length is not a power of two (n >= 2).
    """
    x = np.moveaxis(np.asarray(signal, dtype=np.float64), axis, -1)
    n = x.shape[-1]
    _require_power_of_two(n)
    if n < 2:
        raise SizeError("rfft needs at least two samples")
    half = n // 2

    packed = _fft_last(x[..., 0::2] + 1j * x[..., 1::2], inverse=False)
    k = np.arange(half + 1)
    z = packed[..., k % half]
    z_mirror = np.conj(packed[..., (half - k) % half])
    even = 0.5 * (z + z_mirror)
    odd = -0.5j * (z - z_mirror)
    spectrum = even + _real_twiddles(n, inverse=False) * odd
    return np.moveaxis(spectrum, -1, axis)


def irfft(spectrum: np.ndarray, n: int, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`rfft` with 1/n normalization.

    The imaginary parts of bin 0 and bin n/2 are dropped on entry, since a
    real signal cannot carry them.

    Raises:
        SizeError: If *n* is not a power of two or the spectrum does not hold
            n/2 + 1 bins.
    """
    _require_power_of_two(n)
    if n < 2:
        raise SizeError("irfft needs at least two samples")
    spec = np.moveaxis(np.asarray(spectrum, dtype=np.complex128), axis, -1)
    half = n // 2
    if spec.shape[-1] != half + 1:
        raise SizeError(
            f"irfft of length {n} needs {half + 1} bins, got {spec.shape[-1]}"
        )
    spec = spec.copy()
    spec[..., 0] = spec[..., 0].real
    spec[..., half] = spec[..., half].real

    k = np.arange(half)
    low = spec[..., :half]
    mirror = np.conj(spec[..., half - k])
    even = 0.5 * (low + mirror)
    odd = 0.5 * (low - mirror) * _real_twiddles(n, inverse=True)
    packed = _fft_last(even + 1j * odd, inverse=True) / half

    out = np.empty(spec.shape[:-1] + (n,), dtype=np.float64)
    out[..., 0::2] = packed.real
    out[..., 1::2] = packed.imag
    return np.moveaxis(out, -1, axis)
