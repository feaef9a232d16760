"""Diagnostics: coordinate checks, operator norms and max-Gaussian scaling."""
from mufno.diagnostics.coord_check import (
    CoordCheckSummary,
    FeatureTrace,
    coord_check,
    summarize,
    traces_table,
)
from mufno.diagnostics.max_gaussian import (
    NormScalingReport,
    NormScalingRow,
    max_gaussian_mc,
    mup_invariance_spread,
    norm_scaling,
)
from mufno.diagnostics.spectral_norm import (
    max_mode_norm,
    power_iteration,
    spectral_norm_exact,
)

__all__ = [
    "CoordCheckSummary",
    "FeatureTrace",
    "NormScalingReport",
    "NormScalingRow",
    "coord_check",
    "max_gaussian_mc",
    "max_mode_norm",
    "mup_invariance_spread",
    "norm_scaling",
    "power_iteration",
    "spectral_norm_exact",
    "summarize",
    "traces_table",
]
