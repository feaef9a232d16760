"""Coordinate checks: feature sizes at init and after a few steps, across K."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from mufno.data.dataset import Dataset
from mufno.model.autodiff import backward
from mufno.model.fno import forward, init_params
from mufno.model.params import FnoConfig
from mufno.model.spectral import spectral_conv_apply
from mufno.numerics.rng import SeededRng
from mufno.training.optimizer import AdamState, adam_step, clip_elementwise
from mufno.training.parametrization import HyperParams, Parametrization, abc_at

_log = logging.getLogger(__name__)

INIT_RATIO_LIMIT = 1.5
UPDATE_RATIO_LIMIT = 2.0
CSV_COLUMNS = ["parametrization", "K", "seed", "layer", "quantity", "rms"]


def rms(x: np.ndarray) -> float:
    """Root mean square over grid points, channels and batch jointly."""
    return float(np.sqrt(np.mean(np.square(x))))


@dataclass(frozen=True)
class FeatureTrace:
    """Per-layer RMS values for one (K, seed).

    ``h_init`` covers layers 0..L (0 is the lifted input); the other
    quantities cover blocks 1..L and are stored at index layer - 1.
    """

    parametrization: str
    K: int
    seed: int
    steps: int
    h_init: tuple[float, ...]
    w_init: tuple[float, ...]
    dw_t: tuple[float, ...]
    dKh_t: tuple[float, ...]

    def rows(self) -> list[list]:
        out = []
        key = [self.parametrization, self.K, self.seed]
        for layer, value in enumerate(self.h_init):
            out.append(key + [layer, "h_init", value])
        for name in ("w_init", "dw_t", "dKh_t"):
            for index, value in enumerate(getattr(self, name)):
                out.append(key + [index + 1, name, value])
        return out


def _ratio(values: Sequence[float]) -> float:
    hi, lo = max(values), min(values)
    if hi == 0.0:
        return 1.0
    if lo == 0.0:
        return math.inf
    return hi / lo


@dataclass(frozen=True)
class CoordCheckSummary:
    """max/min across K of the seed-averaged RMS, per block."""

    w_init_ratio: tuple[float, ...]
    dw_ratio: tuple[float, ...]
    dKh_ratio: tuple[float, ...]
    init_limit: float = INIT_RATIO_LIMIT
    update_limit: float = UPDATE_RATIO_LIMIT

    @property
    def stable_at_init(self) -> bool:
        return all(r <= self.init_limit for r in self.w_init_ratio)

    @property
    def stable_updates(self) -> bool:
        return all(r <= self.update_limit for r in self.dw_ratio)


def summarize(
    traces: Sequence[FeatureTrace],
    init_limit: float = INIT_RATIO_LIMIT,
    update_limit: float = UPDATE_RATIO_LIMIT,
) -> CoordCheckSummary:
    by_k: dict[int, list[FeatureTrace]] = {}
    for trace in traces:
        by_k.setdefault(trace.K, []).append(trace)

    def ratios(name: str) -> tuple[float, ...]:
        means = np.array(
            [
                np.mean([getattr(t, name) for t in group], axis=0)
                for group in by_k.values()
            ]
        )
        return tuple(_ratio(means[:, layer]) for layer in range(means.shape[1]))

    return CoordCheckSummary(
        w_init_ratio=ratios("w_init"),
        dw_ratio=ratios("dw_t"),
        dKh_ratio=ratios("dKh_t"),
        init_limit=init_limit,
        update_limit=update_limit,
    )


def _trace_one(
    config: FnoConfig,
    parametrization: Parametrization,
    xi: HyperParams,
    steps: int,
    inputs: np.ndarray,
    targets: np.ndarray,
    seed: int,
) -> FeatureTrace:
    abc = abc_at(parametrization, config.K, config.m)
    rng = SeededRng(seed)
    params0 = init_params(config, parametrization, rng.substream("init"), abc=abc)
    _, cache0 = forward(params0, config, inputs, cache=True)

    params = params0
    state = AdamState.zeros_like(params, xi.adam_beta1, xi.adam_beta2, xi.adam_eps)
    update_clip = xi.clip_value if xi.clip_placement == "update" else None
    for _ in range(steps):
        _, grads = backward(params, config, inputs, targets)
        if xi.clip_value is not None and xi.clip_placement == "gradient":
            grads = clip_elementwise(grads, xi.clip_value, xi.clip_scope)
        groups = {"spectral": xi.lr * xi.spectral_lr_scale * abc.c, "other": xi.lr}
        params, state = adam_step(
            params,
            grads,
            state,
            groups,
            update_clip=update_clip,
            update_clip_scope=xi.clip_scope,
        )
    _, cache_t = forward(params, config, inputs, cache=True)

    dKh = []
    for layer in range(config.L):
        delta = params.spectral[layer].with_r(
            params.spectral[layer].r - params0.spectral[layer].r
        )
        dKh.append(rms(spectral_conv_apply(delta, cache_t.h[layer])))
    return FeatureTrace(
        parametrization=parametrization.kind,
        K=config.K,
        seed=seed,
        steps=steps,
        h_init=tuple(rms(h) for h in cache0.h),
        w_init=tuple(rms(w) for w in cache0.w),
        dw_t=tuple(rms(wt - w0) for wt, w0 in zip(cache_t.w, cache0.w)),
        dKh_t=tuple(dKh),
    )


def coord_check(
    config: FnoConfig,
    parametrization: Parametrization,
    K_list: Sequence[int],
    steps: int,
    dataset: Dataset,
    *,
    xi: HyperParams | None = None,
    seeds: Sequence[int] = (0, 1, 2),
) -> tuple[list[FeatureTrace], CoordCheckSummary]:
    """Record feature RMS at init and after *steps* Adam steps for every K.

    Every run trains on the same fixed mini-batch (the first ``batch_size``
    samples of *dataset*).

    Raises:
        TruncationError: If some K exceeds n/2 of the dataset grid.
    """
    xi = xi or HyperParams()
    for K in K_list:
        dataclasses.replace(config, K=K).check_grid(dataset.grid.n)
    batch = min(xi.batch_size, len(dataset))
    inputs, targets = dataset.inputs[:batch], dataset.targets[:batch]

    traces = []
    for K in K_list:
        config_k = dataclasses.replace(config, K=K)
        for seed in seeds:
            traces.append(
                _trace_one(config_k, parametrization, xi, steps, inputs, targets, seed)
            )
        _log.info("coord check %s K=%d done", parametrization.kind, K)
    return traces, summarize(traces)


def traces_table(traces: Sequence[FeatureTrace]) -> pd.DataFrame:
    rows = [row for trace in traces for row in trace.rows()]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)
