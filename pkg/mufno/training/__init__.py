"""abc schedules, transfer rescaling and the Adam optimizer."""
from mufno.training.optimizer import (
    AdamState,
    LrSchedule,
    adam_step,
    clip_elementwise,
    lr_at,
)
from mufno.training.parametrization import (
    Abc,
    HyperParams,
    Parametrization,
    Rescaled,
    abc_at,
    log_ratio,
    rescale_hyperparams,
)

__all__ = [
    "Abc",
    "AdamState",
    "HyperParams",
    "LrSchedule",
    "Parametrization",
    "Rescaled",
    "abc_at",
    "adam_step",
    "clip_elementwise",
    "log_ratio",
    "lr_at",
    "rescale_hyperparams",
]
