"""One deterministic training run: the train(xi, K) of the transfer pipeline."""
from __future__ import annotations

import logging
import math
import time
from pathlib import Path
from typing import Optional, Union

import numpy as np

from mufno.data.dataset import Dataset
from mufno.data.io import load_dataset
from mufno.errors import NumericDivergenceError, SizeError
from mufno.experiments.records import TrainRecord
from mufno.model.autodiff import backward, per_sample_relative_l2
from mufno.model.fno import forward, init_params
from mufno.model.params import FnoConfig, ModelParams
from mufno.numerics.rng import SeededRng
from mufno.training.optimizer import AdamState, adam_step, clip_elementwise, lr_at
from mufno.training.parametrization import Abc, HyperParams, Parametrization, abc_at

_log = logging.getLogger(__name__)

DataSource = Union[Dataset, str, Path]
EVAL_CHUNK = 100


class _Diverged(Exception):
    pass


def resolve_dataset(source: DataSource) -> Dataset:
    if isinstance(source, Dataset):
        return source
    return load_dataset(source)


def evaluate(params: ModelParams, config: FnoConfig, ds: Dataset) -> float:
    """Mean relative L2 error over every sample of *ds*."""
    errors = [
        per_sample_relative_l2(
            forward(params, config, ds.inputs[s : s + EVAL_CHUNK]),
            ds.targets[s : s + EVAL_CHUNK],
        )
        for s in range(0, len(ds), EVAL_CHUNK)
    ]
    return float(np.mean(np.concatenate(errors)))


def _validate(config: FnoConfig, *datasets: Dataset) -> None:
    for ds in datasets:
        config.check_grid(ds.grid.n)
        if ds.channels != config.in_channels:
            raise SizeError(
                f"dataset has {ds.channels} input channels, "
                f"model expects {config.in_channels}"
            )
        if ds.targets.shape[2] != config.out_channels:
            raise SizeError(
                f"dataset has {ds.targets.shape[2]} target channels, "
                f"model expects {config.out_channels}"
            )


def train(
    train_data: DataSource,
    eval_data: DataSource,
    config: FnoConfig,
    parametrization: Parametrization,
    xi: HyperParams,
    *,
    abc: Optional[Abc] = None,
    keep_params: bool = False,
) -> TrainRecord:
    """Train a fresh model and return its record.

    Everything random (init, shuffling) derives from ``xi.seed``, so two
    runs with the same inputs give identical records apart from wall_time.
    A NaN, or a batch loss above ``divergence_factor`` times the initial
    train loss, ends the run early and marks it diverged.

    Raises:
        TruncationError, SizeError: If the model does not fit the data;
            raised before any optimizer step.
        DatasetFormatError, DataMissingError: If a dataset path is bad.
    """
    started = time.perf_counter()
    train_ds = resolve_dataset(train_data)
    eval_ds = resolve_dataset(eval_data)
    _validate(config, train_ds, eval_ds)

    abc = abc or abc_at(parametrization, config.K, config.m)
    root = SeededRng(xi.seed)
    params = init_params(config, parametrization, root.substream("init"), abc=abc)
    state = AdamState.zeros_like(params, xi.adam_beta1, xi.adam_beta2, xi.adam_eps)
    shuffle = root.substream("shuffle")

    initial_train = evaluate(params, config, train_ds)
    initial_eval = evaluate(params, config, eval_ds)
    final_train, final_eval = initial_train, initial_eval

    loss_history: list[float] = []
    eval_history: list[float] = []
    eval_epochs: list[int] = []
    step = 0
    diverged = False
    update_clip = xi.clip_value if xi.clip_placement == "update" else None
    n_samples = len(train_ds)

    try:
        for epoch in range(xi.epochs):
            order = shuffle.substream(epoch).permutation(n_samples)
            total = 0.0
            for start in range(0, n_samples, xi.batch_size):
                index = order[start : start + xi.batch_size]
                unit = epoch if xi.lr_schedule.unit == "epoch" else step
                lr = lr_at(xi.lr_schedule, xi.lr, unit)
                loss, grads = backward(
                    params, config, train_ds.inputs[index], train_ds.targets[index]
                )
                limit = xi.divergence_factor * initial_train
                if not math.isfinite(loss) or loss > limit:
                    raise _Diverged(f"batch loss {loss:.3g} at step {step}")
                if xi.clip_value is not None and xi.clip_placement == "gradient":
                    grads = clip_elementwise(grads, xi.clip_value, xi.clip_scope)
                groups = {"spectral": lr * xi.spectral_lr_scale * abc.c, "other": lr}
                params, state = adam_step(
                    params,
                    grads,
                    state,
                    groups,
                    update_clip=update_clip,
                    update_clip_scope=xi.clip_scope,
                )
                step += 1
                total += loss * len(index)
            epoch_loss = total / n_samples
            loss_history.append(epoch_loss)
            _log.debug("epoch %d: train loss %.6g", epoch + 1, epoch_loss)
            if (epoch + 1) % xi.eval_every == 0 or epoch + 1 == xi.epochs:
                eval_history.append(evaluate(params, config, eval_ds))
                eval_epochs.append(epoch + 1)
        if xi.epochs > 0:
            final_train = evaluate(params, config, train_ds)
            final_eval = eval_history[-1]
    except (_Diverged, NumericDivergenceError) as exc:
        diverged = True
        final_train = final_eval = math.inf
        _log.warning(
            "Run diverged (K=%d lr=%g seed=%d): %s", config.K, xi.lr, xi.seed, exc
        )

    record = TrainRecord(
        hyperparams=xi,
        parametrization=parametrization,
        K=config.K,
        loss_history=tuple(loss_history),
        eval_history=tuple(eval_history),
        eval_epochs=tuple(eval_epochs),
        initial_train_loss=initial_train,
        initial_eval_error=initial_eval,
        final_train_loss=final_train,
        final_eval_error=final_eval,
        step_count=step,
        diverged=diverged,
        wall_time=time.perf_counter() - started,
        params=params if keep_params else None,
    )
    if not diverged:
        _log.info(
            "Trained K=%d for %d steps: train %.4g eval %.4g",
            config.K,
            step,
            final_train,
            final_eval,
        )
    return record
