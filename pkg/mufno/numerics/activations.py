"""Pointwise activations and their exact derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact GELU, x * Phi(x)."""
    x = np.asarray(x, dtype=np.float64)
    return x * ndtr(x)


def gelu_prime(x: np.ndarray) -> np.ndarray:
    """Derivative of :func:`gelu`: Phi(x) + x * phi(x)."""
    x = np.asarray(x, dtype=np.float64)
    return ndtr(x) + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=np.float64))


def tanh_prime(x: np.ndarray) -> np.ndarray:
    t = np.tanh(np.asarray(x, dtype=np.float64))
    return 1.0 - t * t


def identity(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def identity_prime(x: np.ndarray) -> np.ndarray:
    return np.ones_like(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class Activation:
    """A named activation with its derivative."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    prime: Callable[[np.ndarray], np.ndarray]


_REGISTRY: dict[str, Activation] = {
    "gelu": Activation("gelu", gelu, gelu_prime),
    "tanh": Activation("tanh", tanh, tanh_prime),
    # Linearized models only; not a valid choice for the theory.
    "identity": Activation("identity", identity, identity_prime),
}

ACTIVATION_NAMES = tuple(_REGISTRY)


def get_activation(name: str) -> Activation:
    """Return the activation registered under *name*.

    Raises:
        KeyError: If no activation has that name.
    """
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"Unknown activation {name!r}; expected one of {ACTIVATION_NAMES}"
        ) from None
