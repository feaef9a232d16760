"""abc-parametrization schedules for the spectral weights and their rescaling.

A parametrization assigns the spectral tensor R = a(K) * r a forward
multiplier a, an init std b for r and a learning-rate multiplier c. Only R
depends on the mode count K; P, Q and the pointwise W layers are left alone.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Literal, Optional

from pydantic import ConfigDict, model_validator
from pydantic.dataclasses import dataclass

from mufno.errors import DomainError
from mufno.training.optimizer import LrSchedule

_STRICT = ConfigDict(extra="forbid")

# Burgers training recipe: batch 20, halve the lr every 50 epochs, clip the
# spectral gradients element-wise at 0.01
RECIPE_BATCH_SIZE = 20
RECIPE_DECAY_EVERY = 50
RECIPE_CLIP_VALUE = 0.01


@dataclass(frozen=True, config=_STRICT)
class Parametrization:
    """Which abc schedule to use and where it is anchored.

    ``base_init_std`` is b at the anchor; when left unset it resolves to
    m^-2 for the model's hidden width m. ``shift`` is the constant psi of the
    equivalence (a, b, c) -> (a/psi, b*psi, c*psi).
    """

    kind: Literal["standard", "mup"] = "mup"
    d: int = 1
    K0: int = 4
    base_init_std: Optional[float] = None
    base_lr_scale: float = 1.0
    shift: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "Parametrization":
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.kind == "mup" and self.K0 < 2:
            raise ValueError("K0 must be >= 2 so that log K0 > 0")
        if self.base_init_std is not None and not self.base_init_std > 0:
            raise ValueError("base_init_std must be positive")
        if not self.base_lr_scale > 0:
            raise ValueError("base_lr_scale must be positive")
        if not self.shift > 0:
            raise ValueError("shift must be positive")
        return self

    @classmethod
    def standard(
        cls, base_init_std: Optional[float] = None, **kwargs
    ) -> "Parametrization":
        return cls(kind="standard", base_init_std=base_init_std, **kwargs)

    @classmethod
    def mup(
        cls, K0: int, base_init_std: Optional[float] = None, **kwargs
    ) -> "Parametrization":
        return cls(kind="mup", K0=K0, base_init_std=base_init_std, **kwargs)

    def anchor_std(self, m: Optional[int] = None) -> float:
        """Return b at the anchor, resolving the m^-2 default if needed."""
        if self.base_init_std is not None:
            return self.base_init_std
        if m is None:
            raise ValueError("base_init_std is unset and no width m was given")
        return float(m) ** -2


@dataclass(frozen=True)
class Abc:
    a: float
    b: float
    c: float


def abc_at(p: Parametrization, K: int, m: Optional[int] = None) -> Abc:
    """Evaluate the (a, b, c) schedule of *p* at mode count *K*.

    Under mup, b and c carry sqrt(d log K0 / (d log K)) relative to the
    anchor, so both schedules agree exactly at K = K0.

    Raises:
        DomainError: If K < 2 under mup (log K would be 0) or K < 1.
    """
    std = p.anchor_std(m)
    if K < 1:
        raise DomainError(f"mode count must be >= 1, got {K}")
    if p.kind == "standard":
        a, b, c = 1.0, std, p.base_lr_scale
    else:
        if K < 2:
            raise DomainError(f"mup needs K >= 2 (log K > 0), got K={K}")
        ratio = (p.d * math.log(p.K0)) / (p.d * math.log(K))
        a, b, c = 1.0, std * math.sqrt(ratio), p.base_lr_scale * math.sqrt(ratio)
    psi = p.shift
    return Abc(a=a / psi, b=b * psi, c=c * psi)


# ---------------------------------------------------------------------------
# Hyperparameters and transfer rescaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, config=_STRICT)
class HyperParams:
    """The training hyperparameters swept and transferred.

    ``lr`` is the master learning rate; the spectral tensors train with
    c(K) * spectral_lr_scale * lr, everything else with lr.
    """

    lr: float = 1e-3
    batch_size: int = 20
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_value: Optional[float] = None
    clip_scope: Literal["spectral_only", "all"] = "spectral_only"
    clip_placement: Literal["gradient", "update"] = "gradient"
    epochs: int = 50
    lr_schedule: LrSchedule = dataclasses.field(default_factory=LrSchedule)
    eval_every: int = 1
    spectral_lr_scale: float = 1.0
    divergence_factor: float = 1e3
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "HyperParams":
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        for name in ("adam_beta1", "adam_beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if not self.adam_eps > 0:
            raise ValueError("adam_eps must be positive")
        if self.clip_value is not None and not self.clip_value > 0:
            raise ValueError("clip_value must be positive when set")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if not self.spectral_lr_scale > 0:
            raise ValueError("spectral_lr_scale must be positive")
        return self

    @classmethod
    def recipe(
        cls, epochs: int = 750, decay_every: int = RECIPE_DECAY_EVERY, **overrides
    ) -> "HyperParams":
        """The Burgers recipe: step decay by half and spectral-only clipping.

        Keyword *overrides* replace any other field, e.g. ``lr``.
        """
        fields = dict(
            batch_size=RECIPE_BATCH_SIZE,
            clip_value=RECIPE_CLIP_VALUE,
            clip_scope="spectral_only",
            clip_placement="gradient",
            lr_schedule=LrSchedule.every(decay_every, epochs, factor=0.5),
        )
        fields.update(overrides)
        return cls(epochs=epochs, **fields)

    def with_recipe_defaults(self) -> "HyperParams":
        """Fill the recipe into fields left at their neutral defaults.

        An unset clip value becomes 0.01 and an empty schedule becomes a
        halving every 50 epochs; anything set explicitly is kept.
        """
        changes: dict = {}
        if self.clip_value is None:
            changes.update(clip_value=RECIPE_CLIP_VALUE, clip_scope="spectral_only")
        if not self.lr_schedule.milestones:
            changes["lr_schedule"] = LrSchedule.every(
                RECIPE_DECAY_EVERY, self.epochs, factor=0.5
            )
        return dataclasses.replace(self, **changes) if changes else self

    @property
    def spectral_lr(self) -> float:
        """Learning rate of R before the parametrization's c(K)."""
        return self.lr * self.spectral_lr_scale


@dataclass(frozen=True)
class Rescaled:
    xi: HyperParams
    init_std: float


def log_ratio(K_proxy: int, K_target: int, d: int = 1) -> float:
    """Return d log K_proxy / (d log K_target)."""
    if K_proxy < 2 or K_target < 2:
        raise DomainError(
            f"rescaling needs K >= 2 on both ends, got {K_proxy} -> {K_target}"
        )
    return (d * math.log(K_proxy)) / (d * math.log(K_target))


def rescale_hyperparams(
    xi: HyperParams, init_std: float, K_proxy: int, K_target: int, d: int = 1
) -> Rescaled:
    """Carry hyperparameters tuned at K_proxy over to K_target.

    The R learning rate picks up sqrt(log K_proxy / log K_target) and the R
    init variance log K_proxy / log K_target. Every other field is unchanged.
    Downward transfer (K_target < K_proxy) is allowed.

    Chained rescales K1 -> K2 -> K3 telescope to the direct K1 -> K3 factor;
    in float64 the two agree to a few ulps (relative 1e-14), not bit for bit.
    """
    ratio = log_ratio(K_proxy, K_target, d)
    if ratio == 1.0:
        return Rescaled(xi=xi, init_std=init_std)
    scale = math.sqrt(ratio)
    return Rescaled(
        xi=dataclasses.replace(xi, spectral_lr_scale=xi.spectral_lr_scale * scale),
        init_std=init_std * scale,
    )
