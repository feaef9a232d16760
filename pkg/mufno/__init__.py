"""mufno: Fourier neural operators with a mode-count-aware parametrization.

Sub-packages: ``numerics`` (FFT, RNG, grids), ``model`` (FNO forward,
backward, checkpoints), ``training`` (abc schedules, Adam), ``data``
(Burgers datasets), ``experiments`` (training, sweeps, transfer) and
``diagnostics`` (coordinate checks, operator norms).
"""

__version__ = "0.1.0"
