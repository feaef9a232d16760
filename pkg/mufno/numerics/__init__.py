"""Deterministic tensor primitives: FFT pair, activations, seeded streams."""
from mufno.numerics.activations import Activation, get_activation, gelu, gelu_prime
from mufno.numerics.fft import fft, ifft, irfft, is_power_of_two, rfft
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng

__all__ = [
    "Activation",
    "Grid1D",
    "SeededRng",
    "fft",
    "gelu",
    "gelu_prime",
    "get_activation",
    "ifft",
    "irfft",
    "is_power_of_two",
    "rfft",
]
