"""Grid sweeps over one hyperparameter axis, mode counts and seeds."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Optional

import numpy as np

from mufno.data.dataset import Dataset
from mufno.errors import DataMissingError, SweepFailureError
from mufno.experiments.records import (
    SweepResult,
    SweepSpec,
    TrainRecord,
    aggregate_metric,
)
from mufno.experiments.trainer import DataSource, resolve_dataset, train

_log = logging.getLogger(__name__)

Trainer = Callable[..., TrainRecord]
Cell = tuple[int, int, int]

_WORKER_DATA: dict[str, Dataset] = {}


def _init_worker(train_ds: Dataset, eval_ds: Dataset) -> None:
    _WORKER_DATA["train"] = train_ds
    _WORKER_DATA["eval"] = eval_ds


def run_cell(
    trainer: Trainer,
    train_ds: Dataset,
    eval_ds: Dataset,
    spec: SweepSpec,
    cell: Cell,
) -> TrainRecord:
    value_index, k_index, seed_index = cell
    xi = spec.hyperparams_for(value_index, spec.replicate_seeds[seed_index])
    config = spec.config_for(spec.K_list[k_index])
    return trainer(train_ds, eval_ds, config, spec.parametrization, xi)


def _pooled_cell(trainer: Trainer, spec: SweepSpec, cell: Cell) -> TrainRecord:
    record = run_cell(trainer, _WORKER_DATA["train"], _WORKER_DATA["eval"], spec, cell)
    return record.without_params()


def resolve_sweep_data(
    spec: SweepSpec,
    train_data: Optional[DataSource],
    eval_data: Optional[DataSource],
) -> tuple[Dataset, Dataset]:
    train_source = train_data if train_data is not None else spec.train_path
    eval_source = eval_data if eval_data is not None else spec.eval_path
    if train_source is None or eval_source is None:
        raise DataMissingError("sweep needs train and eval datasets (paths or objects)")
    return resolve_dataset(train_source), resolve_dataset(eval_source)


def aggregate(
    spec: SweepSpec,
    records: list[list[list[TrainRecord]]],
    *,
    strict: bool = True,
) -> SweepResult:
    """Reduce seed replicates and pick the argmin per K.

    Diverged seeds are dropped from a cell's mean; a cell with no finite seed
    counts as +inf. Ties go to the smaller value index. With *strict*, a K
    where every run diverged raises; otherwise its argmin is reported as -1.

    Raises:
        SweepFailureError: Naming the first all-diverged K (strict only).
    """
    n_values, n_k = len(spec.values), len(spec.K_list)
    mean = np.empty((n_values, n_k))
    std = np.empty((n_values, n_k))
    for v in range(n_values):
        for k in range(n_k):
            mean[v, k], std[v, k] = aggregate_metric(records[v][k], spec.select_by)

    argmin = []
    for k, K in enumerate(spec.K_list):
        column = mean[:, k]
        if not np.any(np.isfinite(column)):
            if strict:
                raise SweepFailureError(f"every run diverged at K={K}", K=K)
            argmin.append(-1)
            continue
        argmin.append(int(np.argmin(column)))
    return SweepResult(
        spec=spec, records=records, mean_loss=mean, std_loss=std, argmin=tuple(argmin)
    )


def sweep(
    spec: SweepSpec,
    *,
    train_data: Optional[DataSource] = None,
    eval_data: Optional[DataSource] = None,
    parallelism: int = 1,
    trainer: Trainer = train,
    strict: bool = True,
) -> SweepResult:
    """Train every (value, K, seed) cell and select the best value per K.

    Cells are independent; with ``parallelism > 1`` they run in a process
    pool and land in fixed grid positions, so the result never depends on
    completion order. ``parallelism == 1`` runs inline.

    Raises:
        SweepFailureError: If every cell of some K diverged (strict only).
        DataMissingError, DatasetFormatError: If the datasets are unusable.
    """
    train_ds, eval_ds = resolve_sweep_data(spec, train_data, eval_data)
    cells = [
        (v, k, s)
        for v in range(len(spec.values))
        for k in range(len(spec.K_list))
        for s in range(len(spec.replicate_seeds))
    ]
    grid: list[list[list[Optional[TrainRecord]]]] = [
        [[None] * len(spec.replicate_seeds) for _ in spec.K_list] for _ in spec.values
    ]
    _log.info(
        "Sweeping %s over %d values x %d K x %d seeds (parallelism %d)",
        spec.axis,
        len(spec.values),
        len(spec.K_list),
        len(spec.replicate_seeds),
        parallelism,
    )

    def place(cell: Cell, record: TrainRecord) -> None:
        v, k, s = cell
        grid[v][k][s] = record
        _log.info(
            "cell %s=%s K=%d seed=%d: train %.4g eval %.4g%s",
            spec.axis,
            spec.axis_value(v),
            spec.K_list[k],
            spec.replicate_seeds[s],
            record.final_train_loss,
            record.final_eval_error,
            " (diverged)" if record.diverged else "",
        )

    if parallelism <= 1:
        for cell in cells:
            record = run_cell(trainer, train_ds, eval_ds, spec, cell)
            place(cell, record.without_params())
    else:
        with ProcessPoolExecutor(
            max_workers=parallelism,
            initializer=_init_worker,
            initargs=(train_ds, eval_ds),
        ) as pool:
            futures = {
                pool.submit(_pooled_cell, trainer, spec, cell): cell for cell in cells
            }
            for future in as_completed(futures):
                place(futures[future], future.result())

    return aggregate(spec, grid, strict=strict)
