"""FNO-1D: lifting P, L spectral blocks, two-layer projection Q."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mufno.errors import NumericDivergenceError, SizeError
from mufno.model.params import FnoConfig, ModelParams, SpectralConvParams
from mufno.model.spectral import spectral_conv_apply
from mufno.numerics.activations import get_activation
from mufno.numerics.rng import SeededRng
from mufno.training.parametrization import Abc, Parametrization, abc_at

_log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Initialization
# ---------------------------------------------------------------------------

def _fan_in(rng: SeededRng, name: str, fan_in: int, fan_out: int) -> np.ndarray:
    return rng.substream(name).normal((fan_in, fan_out), std=math.sqrt(1.0 / fan_in))


def _init_r(
    rng: SeededRng, name: str, K: int, m: int, b: float, real_mode: bool
) -> np.ndarray:
    if real_mode:
        re = rng.substream(f"{name}.re").normal((K, m, m), std=b)
        return re.astype(np.complex128)
    re = rng.substream(f"{name}.re").normal((K, m, m), std=b / math.sqrt(2.0))
    im = rng.substream(f"{name}.im").normal((K, m, m), std=b / math.sqrt(2.0))
    # bin 0 is forced real and carries the full variance
    re[0] = rng.substream(f"{name}.dc").normal((m, m), std=b)
    im[0] = 0.0
    return re + 1j * im


def init_params(
    config: FnoConfig,
    parametrization: Parametrization,
    rng: SeededRng,
    *,
    abc: Optional[Abc] = None,
) -> ModelParams:
    """Draw a fresh parameter set.

    P, W and Q use fan-in init N(0, 1/fan_in) and zero biases, independent of
    K. Each r component is N(0, b(K)^2) and the forward multiplier is a(K).
    Every tensor draws from its own named substream of *rng*. An explicit
    *abc* overrides the schedule (used for transferred targets).
    """
    abc = abc or abc_at(parametrization, config.K, config.m)
    m, L = config.m, config.L
    spectral = []
    W_weight, W_bias = [], []
    for layer in range(L):
        W_weight.append(_fan_in(rng, f"layers.{layer}.W.weight", m, m))
        W_bias.append(np.zeros(m))
        r = _init_r(rng, f"layers.{layer}.R", config.K, m, abc.b, config.real_r_mode)
        spectral.append(
            SpectralConvParams(r=r, a_scale=abc.a, real_r_mode=config.real_r_mode)
        )
    params = ModelParams(
        P_weight=_fan_in(rng, "P.weight", config.lifted_channels, m),
        P_bias=np.zeros(m),
        W_weight=tuple(W_weight),
        W_bias=tuple(W_bias),
        spectral=tuple(spectral),
        Q0_weight=_fan_in(rng, "Q.0.weight", m, m),
        Q0_bias=np.zeros(m),
        Q1_weight=_fan_in(rng, "Q.1.weight", m, config.out_channels),
        Q1_bias=np.zeros(config.out_channels),
    )
    _log.debug(
        "Initialized FNO L=%d m=%d K=%d with a=%.4g b=%.4g",
        L,
        m,
        config.K,
        abc.a,
        abc.b,
    )
    return params


# ---------------------------------------------------------------------------
# Forward
# ---------------------------------------------------------------------------

@dataclass
class ForwardCache:
    """Every intermediate of one forward pass.

    ``h[0]`` is the lifted input P v, ``h[l]`` the activated output of block
    l and ``w[l-1]`` its pre-activation. ``spectra[l-1]`` is the truncated
    rfft of ``h[l-1]`` and ``kh[l-1]`` the spectral branch K_l h_{l-1}.
    """

    x: np.ndarray
    h: list[np.ndarray] = field(default_factory=list)
    w: list[np.ndarray] = field(default_factory=list)
    kh: list[np.ndarray] = field(default_factory=list)
    spectra: list[np.ndarray] = field(default_factory=list)
    q: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    out: Optional[np.ndarray] = None


def lift_input(config: FnoConfig, inputs: np.ndarray) -> np.ndarray:
    """Append the coordinate channel x/domain_length when configured."""
    if inputs.ndim != 3:
        raise SizeError(f"expected input of shape [batch, n, c], got {inputs.shape}")
    if inputs.shape[-1] != config.in_channels:
        raise SizeError(
            f"input has {inputs.shape[-1]} channels, config expects "
            f"{config.in_channels}"
        )
    if not config.append_grid:
        return np.asarray(inputs, dtype=np.float64)
    batch, n, _ = inputs.shape
    coords = np.broadcast_to((np.arange(n) / n)[None, :, None], (batch, n, 1))
    return np.concatenate([inputs, coords], axis=-1)


def forward(
    params: ModelParams,
    config: FnoConfig,
    inputs: np.ndarray,
    *,
    cache: bool = False,
):
    """Evaluate G = Q o phi(W_L + K_L) o ... o phi(W_1 + K_1) o P.

    Returns the output [batch, n, out_channels], or ``(output, cache)`` when
    *cache* is true.

    Raises:
        SizeError: On shape mismatch.
        TruncationError: If K > n/2.
        NumericDivergenceError: If the output holds NaN or Inf.
    """
    act = get_activation(config.activation)
    config.check_grid(inputs.shape[1] if inputs.ndim == 3 else 0)
    x = lift_input(config, inputs)
    store = ForwardCache(x=x)

    h = x @ params.P_weight + params.P_bias
    store.h.append(h)
    for layer in range(config.L):
        kh, spectrum = spectral_conv_apply(
            params.spectral[layer], h, return_spectrum=True
        )
        w = h @ params.W_weight[layer] + params.W_bias[layer] + kh
        h = act.fn(w)
        store.kh.append(kh)
        store.spectra.append(spectrum)
        store.w.append(w)
        store.h.append(h)

    q = h @ params.Q0_weight + params.Q0_bias
    g = act.fn(q)
    out = g @ params.Q1_weight + params.Q1_bias
    if not np.all(np.isfinite(out)):
        raise NumericDivergenceError(
            "non-finite values in forward output", tensor="output"
        )
    store.q, store.g, store.out = q, g, out
    if cache:
        return out, store
    return out
