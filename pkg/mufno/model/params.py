"""Architecture config and the trainable tensors of an FNO-1D."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass as std_dataclass
from typing import Iterator, Literal

import numpy as np
from pydantic import ConfigDict, model_validator
from pydantic.dataclasses import dataclass

from mufno.errors import NumericDivergenceError, SizeError, TruncationError


@dataclass(frozen=True, config=ConfigDict(extra="forbid"))
class FnoConfig:
    """Width m, depth L and retained modes K of the network."""

    d: int = 1
    L: int = 4
    m: int = 64
    K: int = 16
    activation: Literal["gelu", "tanh", "identity"] = "gelu"
    in_channels: int = 1
    out_channels: int = 1
    append_grid: bool = True
    real_r_mode: bool = False

    @model_validator(mode="after")
    def _check(self) -> "FnoConfig":
        if self.d != 1:
            raise ValueError("only d=1 is supported")
        for name in ("L", "m", "K", "in_channels", "out_channels"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        return self

    @property
    def lifted_channels(self) -> int:
        """Channels seen by P: the input function plus the coordinate."""
        return self.in_channels + (1 if self.append_grid else 0)

    def check_grid(self, n: int) -> None:
        """Raise TruncationError if K does not fit a grid of n points."""
        if self.K > n // 2:
            raise TruncationError(f"K={self.K} exceeds n/2={n // 2} for a grid of {n}")


def tensor_names(L: int) -> list[str]:
    """Parameter names in the fixed declaration order."""
    names = ["P.weight", "P.bias"]
    for layer in range(L):
        names += [
            f"layers.{layer}.W.weight",
            f"layers.{layer}.W.bias",
            f"layers.{layer}.R",
        ]
    names += ["Q.0.weight", "Q.0.bias", "Q.1.weight", "Q.1.bias"]
    return names


def is_spectral(name: str) -> bool:
    return name.endswith(".R")


@std_dataclass(frozen=True)
class SpectralConvParams:
    """Trainable r of shape [K, m, m] and its forward multiplier a(K)."""

    r: np.ndarray
    a_scale: float = 1.0
    real_r_mode: bool = False

    def __post_init__(self) -> None:
        if self.r.ndim != 3 or self.r.shape[1] != self.r.shape[2]:
            raise SizeError(f"r must have shape [K, m, m], got {self.r.shape}")
        if not self.a_scale > 0:
            raise ValueError(f"a_scale must be positive, got {self.a_scale}")

    @property
    def K(self) -> int:
        return self.r.shape[0]

    @property
    def m(self) -> int:
        return self.r.shape[1]

    @property
    def R(self) -> np.ndarray:
        """Effective weight a(K) * r."""
        return self.a_scale * self.r

    def with_r(self, r: np.ndarray) -> "SpectralConvParams":
        return dataclasses.replace(self, r=r)


@std_dataclass(frozen=True)
class ModelParams:
    """All trainable tensors. Pointwise maps act on the channel axis."""

    P_weight: np.ndarray
    P_bias: np.ndarray
    W_weight: tuple[np.ndarray, ...]
    W_bias: tuple[np.ndarray, ...]
    spectral: tuple[SpectralConvParams, ...]
    Q0_weight: np.ndarray
    Q0_bias: np.ndarray
    Q1_weight: np.ndarray
    Q1_bias: np.ndarray

    @property
    def L(self) -> int:
        return len(self.spectral)

    def flat_items(self) -> Iterator[tuple[str, np.ndarray, bool]]:
        """Yield (name, tensor, is_spectral) in declaration order."""
        yield "P.weight", self.P_weight, False
        yield "P.bias", self.P_bias, False
        for layer in range(self.L):
            yield f"layers.{layer}.W.weight", self.W_weight[layer], False
            yield f"layers.{layer}.W.bias", self.W_bias[layer], False
            yield f"layers.{layer}.R", self.spectral[layer].r, True
        yield "Q.0.weight", self.Q0_weight, False
        yield "Q.0.bias", self.Q0_bias, False
        yield "Q.1.weight", self.Q1_weight, False
        yield "Q.1.bias", self.Q1_bias, False

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: t for name, t, _ in self.flat_items()}

    def with_tensors(self, tensors: dict[str, np.ndarray]) -> "ModelParams":
        """Return a copy with the named tensors replaced."""
        current = self.as_dict()
        unknown = set(tensors) - set(current)
        if unknown:
            raise KeyError(f"unknown parameter names: {sorted(unknown)}")
        current.update(tensors)
        return ModelParams.from_dict(
            current,
            a_scales=[s.a_scale for s in self.spectral],
            real_r_mode=self.spectral[0].real_r_mode if self.spectral else False,
        )

    @classmethod
    def from_dict(
        cls,
        tensors: dict[str, np.ndarray],
        a_scales: list[float],
        real_r_mode: bool = False,
    ) -> "ModelParams":
        L = len(a_scales)
        return cls(
            P_weight=tensors["P.weight"],
            P_bias=tensors["P.bias"],
            W_weight=tuple(tensors[f"layers.{i}.W.weight"] for i in range(L)),
            W_bias=tuple(tensors[f"layers.{i}.W.bias"] for i in range(L)),
            spectral=tuple(
                SpectralConvParams(
                    r=tensors[f"layers.{i}.R"],
                    a_scale=a_scales[i],
                    real_r_mode=real_r_mode,
                )
                for i in range(L)
            ),
            Q0_weight=tensors["Q.0.weight"],
            Q0_bias=tensors["Q.0.bias"],
            Q1_weight=tensors["Q.1.weight"],
            Q1_bias=tensors["Q.1.bias"],
        )

    def finite_check(self) -> None:
        for name, t, _ in self.flat_items():
            if not np.all(np.isfinite(t)):
                raise NumericDivergenceError(
                    f"non-finite entries in {name}", tensor=name
                )


@std_dataclass
class Gradients:
    """d loss / d parameter for every tensor, keyed by parameter name.

    Spectral entries use grad = d/d(re) + i d/d(im).
    """

    tensors: dict[str, np.ndarray]

    def flat_items(self) -> Iterator[tuple[str, np.ndarray, bool]]:
        for name, t in self.tensors.items():
            yield name, t, is_spectral(name)

    def with_tensors(self, tensors: dict[str, np.ndarray]) -> "Gradients":
        merged = dict(self.tensors)
        merged.update(tensors)
        return Gradients(merged)

    def max_abs(self) -> float:
        """Largest absolute scalar component (re and im counted separately)."""
        best = 0.0
        for _, t, _ in self.flat_items():
            if t.size == 0:
                continue
            if np.iscomplexobj(t):
                parts = (np.abs(t.real).max(), np.abs(t.imag).max())
                best = max(best, *(float(p) for p in parts))
            else:
                best = max(best, float(np.abs(t).max()))
        return best

    def finite_check(self) -> None:
        """Raise NumericDivergenceError naming the first non-finite tensor."""
        for name, t, _ in self.flat_items():
            if not np.all(np.isfinite(t)):
                raise NumericDivergenceError(
                    f"non-finite gradient in {name}", tensor=name
                )


@std_dataclass(frozen=True)
class ParameterCount:
    total: int
    spectral: int

    @property
    def spectral_fraction(self) -> float:
        return self.spectral / self.total if self.total else 0.0


def parameter_count(config: FnoConfig) -> ParameterCount:
    """Count real scalars; a complex r entry counts as two (one if real mode)."""
    m, L = config.m, config.L
    per_entry = 1 if config.real_r_mode else 2
    spectral = L * config.K * m * m * per_entry
    dense = (config.lifted_channels + 1) * m
    dense += L * (m * m + m)
    dense += m * m + m + m * config.out_channels + config.out_channels
    return ParameterCount(total=dense + spectral, spectral=spectral)
