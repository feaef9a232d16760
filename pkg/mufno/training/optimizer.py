"""Adam with per-group learning rates, element-wise clipping and step decay."""
from __future__ import annotations

from dataclasses import dataclass as std_dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import ConfigDict, model_validator
from pydantic.dataclasses import dataclass

from mufno.errors import NumericDivergenceError

if TYPE_CHECKING:
    from mufno.model.params import Gradients, ModelParams


# ---------------------------------------------------------------------------
# Learning-rate schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True, config=ConfigDict(extra="forbid"))
class LrSchedule:
    """Multiply the learning rate by *factor* at every milestone passed."""

    milestones: tuple[int, ...] = ()
    factor: float = 0.5
    unit: Literal["epoch", "step"] = "epoch"

    @model_validator(mode="after")
    def _check(self) -> "LrSchedule":
        if not 0.0 < self.factor <= 1.0:
            raise ValueError("factor must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.milestones, self.milestones[1:])):
            raise ValueError("milestones must be strictly increasing")
        if any(m < 0 for m in self.milestones):
            raise ValueError("milestones must be non-negative")
        return self

    @classmethod
    def every(
        cls, step_size: int, total: int, factor: float = 0.5, unit: str = "epoch"
    ) -> "LrSchedule":
        """Decay every *step_size* units up to (excluding) *total*."""
        return cls(
            milestones=tuple(range(step_size, total, step_size)),
            factor=factor,
            unit=unit,
        )


def lr_at(schedule: LrSchedule, base_lr: float, step: int) -> float:
    """Return base_lr * factor ** (number of milestones <= step)."""
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    passed = sum(1 for m in schedule.milestones if m <= step)
    return base_lr * schedule.factor**passed


# ---------------------------------------------------------------------------
# Clipping
# ---------------------------------------------------------------------------

def _clip_tensor(x: np.ndarray, c: float) -> np.ndarray:
    if np.iscomplexobj(x):
        return np.clip(x.real, -c, c) + 1j * np.clip(x.imag, -c, c)
    return np.clip(x, -c, c)


def clip_elementwise(
    grads: "Gradients",
    c: float,
    scope: Literal["spectral_only", "all"] = "spectral_only",
) -> "Gradients":
    """Clamp every scalar component (re and im separately) to [-c, c]."""
    if not c > 0:
        raise ValueError(f"clip value must be positive, got {c}")
    clipped = {
        name: _clip_tensor(t, c) if scope == "all" or spectral else t
        for name, t, spectral in grads.flat_items()
    }
    return grads.with_tensors(clipped)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@std_dataclass
class AdamState:
    """First and second moments mirroring the model's tensors.

    Complex tensors keep their real and imaginary moments independently;
    ``v`` always holds per-component squares.
    """

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(
        cls,
        params: "ModelParams",
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        m = {name: np.zeros_like(t) for name, t, _ in params.flat_items()}
        v = {name: np.zeros_like(t) for name, t, _ in params.flat_items()}
        return cls(m=m, v=v, t=0, beta1=beta1, beta2=beta2, eps=eps)

    def copy(self) -> "AdamState":
        return AdamState(
            m={k: a.copy() for k, a in self.m.items()},
            v={k: a.copy() for k, a in self.v.items()},
            t=self.t,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
        )


def _square(g: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(g):
        return g.real * g.real + 1j * (g.imag * g.imag)
    return g * g


def _normalized(m_hat: np.ndarray, v_hat: np.ndarray, eps: float) -> np.ndarray:
    if np.iscomplexobj(m_hat):
        re = m_hat.real / (np.sqrt(v_hat.real) + eps)
        im = m_hat.imag / (np.sqrt(v_hat.imag) + eps)
        return re + 1j * im
    return m_hat / (np.sqrt(v_hat) + eps)


def adam_step(
    params: "ModelParams",
    grads: "Gradients",
    state: AdamState,
    lr_groups: dict[str, float],
    *,
    update_clip: float | None = None,
    update_clip_scope: Literal["spectral_only", "all"] = "spectral_only",
) -> tuple["ModelParams", AdamState]:
    """Apply one Adam step and return the new params and state.

    Spectral tensors use ``lr_groups["spectral"]``, everything else
    ``lr_groups["other"]``. Tensors are visited in the fixed declaration
    order. *update_clip* clamps the normalized update instead of the raw
    gradient when clipping is placed after the moments.

    Raises:
        NumericDivergenceError: If any gradient entry is NaN or Inf.
    """
    for name, g, _ in grads.flat_items():
        if not np.all(np.isfinite(g)):
            raise NumericDivergenceError(f"non-finite gradient in {name}", tensor=name)
    for key in ("spectral", "other"):
        if lr_groups[key] < 0:
            raise ValueError(f"learning rate for {key} must be >= 0")

    new_state = state.copy()
    new_state.t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**new_state.t
    bias2 = 1.0 - b2**new_state.t

    grad_map = {name: g for name, g, _ in grads.flat_items()}
    updated: dict[str, np.ndarray] = {}
    for name, p, spectral in params.flat_items():
        g = grad_map[name]
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * _square(g)
        new_state.m[name] = m
        new_state.v[name] = v
        direction = _normalized(m / bias1, v / bias2, state.eps)
        if update_clip is not None and (update_clip_scope == "all" or spectral):
            direction = _clip_tensor(direction, update_clip)
        lr = lr_groups["spectral"] if spectral else lr_groups["other"]
        updated[name] = p - lr * direction
    return params.with_tensors(updated), new_state
