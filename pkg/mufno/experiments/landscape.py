"""Loss-versus-hyperparameter landscapes per K, written as CSV tables."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Optional

import pandas as pd

from mufno.experiments.records import SweepResult, SweepSpec, aggregate_metric
from mufno.experiments.sweep import Trainer, resolve_sweep_data, sweep
from mufno.experiments.trainer import DataSource, train

_log = logging.getLogger(__name__)

CELL_COLUMNS = [
    "parametrization",
    "K",
    "axis",
    "value",
    "seed",
    "final_train_loss",
    "final_eval_error",
    "diverged",
]
SUMMARY_COLUMNS = [
    "parametrization",
    "K",
    "value",
    "mean_loss",
    "std_loss",
    "is_optimal",
]

ParametrizationChoice = Literal["standard", "mup", "both", "spec"]


@dataclass(frozen=True)
class Landscape:
    label: str
    result: SweepResult
    cells: pd.DataFrame
    summary: pd.DataFrame


def cell_table(result: SweepResult, label: str) -> pd.DataFrame:
    """One row per (K, value, seed), plus a seed=-1 aggregate per (K, value)."""
    spec = result.spec
    rows = []
    for k, K in enumerate(spec.K_list):
        for v in range(len(spec.values)):
            records = result.records[v][k]
            for s, record in enumerate(records):
                rows.append(
                    [
                        label,
                        K,
                        spec.axis,
                        spec.axis_value(v),
                        spec.replicate_seeds[s],
                        record.final_train_loss,
                        record.final_eval_error,
                        record.diverged,
                    ]
                )
            mean_train, _ = aggregate_metric(records, "train")
            mean_eval, _ = aggregate_metric(records, "eval")
            rows.append(
                [
                    label,
                    K,
                    spec.axis,
                    spec.axis_value(v),
                    -1,
                    mean_train,
                    mean_eval,
                    all(r.diverged for r in records),
                ]
            )
    return pd.DataFrame(rows, columns=CELL_COLUMNS)


def summary_table(result: SweepResult, label: str) -> pd.DataFrame:
    """Mean and std of the selection metric per (K, value); argmin rows flagged."""
    spec = result.spec
    rows = []
    for k, K in enumerate(spec.K_list):
        for v in range(len(spec.values)):
            rows.append(
                [
                    label,
                    K,
                    spec.axis_value(v),
                    float(result.mean_loss[v, k]),
                    float(result.std_loss[v, k]),
                    result.argmin[k] == v,
                ]
            )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def _variants(spec: SweepSpec, choice: ParametrizationChoice) -> list[SweepSpec]:
    kinds: Iterable[str]
    if choice == "spec":
        return [spec]
    kinds = ("standard", "mup") if choice == "both" else (choice,)
    return [
        dataclasses.replace(
            spec, parametrization=dataclasses.replace(spec.parametrization, kind=kind)
        )
        for kind in kinds
    ]


def lr_landscape(
    spec: SweepSpec,
    *,
    parametrizations: ParametrizationChoice = "spec",
    output_dir: Optional[str | Path] = None,
    train_data: Optional[DataSource] = None,
    eval_data: Optional[DataSource] = None,
    parallelism: int = 1,
    trainer: Trainer = train,
) -> dict[str, Landscape]:
    """Sweep and tabulate the loss curve over the axis for every K.

    A cell whose every seed diverged appears with an ``inf`` loss; a K where
    every run diverged has no optimal row. With *output_dir*, each
    parametrization writes ``landscape_<kind>.csv`` (per cell) and
    ``landscape_<kind>_summary.csv``.
    """
    train_ds, eval_ds = resolve_sweep_data(spec, train_data, eval_data)
    out: dict[str, Landscape] = {}
    for variant in _variants(spec, parametrizations):
        label = variant.parametrization.kind
        result = sweep(
            variant,
            train_data=train_ds,
            eval_data=eval_ds,
            parallelism=parallelism,
            trainer=trainer,
            strict=False,
        )
        landscape = Landscape(
            label=label,
            result=result,
            cells=cell_table(result, label),
            summary=summary_table(result, label),
        )
        out[label] = landscape
        if output_dir is not None:
            write_landscape(landscape, Path(output_dir))
        _log.info(
            "Landscape %s: optimal %s per K = %s", label, spec.axis, result.argmin
        )
    return out


def write_landscape(landscape: Landscape, output_dir: Path) -> list[Path]:
    output_dir.mkdir(parents=True, exist_ok=True)
    cells = output_dir / f"landscape_{landscape.label}.csv"
    summary = output_dir / f"landscape_{landscape.label}_summary.csv"
    landscape.cells.to_csv(cells, index=False)
    landscape.summary.to_csv(summary, index=False)
    return [cells, summary]
