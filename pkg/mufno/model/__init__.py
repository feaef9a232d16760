"""FNO-1D architecture, reverse-mode gradients and checkpoints."""
from mufno.model.autodiff import backward, relative_l2_loss
from mufno.model.checkpoint import load_checkpoint, save_checkpoint
from mufno.model.fno import ForwardCache, forward, init_params
from mufno.model.gradcheck import GradcheckReport, gradcheck
from mufno.model.params import (
    FnoConfig,
    Gradients,
    ModelParams,
    SpectralConvParams,
    parameter_count,
)
from mufno.model.spectral import spectral_conv_apply

__all__ = [
    "FnoConfig",
    "ForwardCache",
    "GradcheckReport",
    "Gradients",
    "ModelParams",
    "SpectralConvParams",
    "backward",
    "forward",
    "gradcheck",
    "init_params",
    "load_checkpoint",
    "parameter_count",
    "relative_l2_loss",
    "save_checkpoint",
    "spectral_conv_apply",
]
