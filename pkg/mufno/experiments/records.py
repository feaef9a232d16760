"""Value types passed between the trainer, sweeps and transfer pipeline."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass as std_dataclass
from dataclasses import field
from typing import Literal, Optional

import numpy as np
from pydantic import ConfigDict, Field, model_validator
from pydantic.dataclasses import dataclass

from mufno.model.params import FnoConfig, ModelParams
from mufno.training.parametrization import HyperParams, Parametrization

SweepAxis = Literal["lr", "batch_size", "adam_beta2"]


@std_dataclass(frozen=True)
class TrainRecord:
    """Outcome of one training run.

    A diverged run keeps the histories up to the point of failure and
    reports +inf for both final metrics.
    """

    hyperparams: HyperParams
    parametrization: Parametrization
    K: int
    loss_history: tuple[float, ...]
    eval_history: tuple[float, ...]
    eval_epochs: tuple[int, ...]
    initial_train_loss: float
    initial_eval_error: float
    final_train_loss: float
    final_eval_error: float
    step_count: int
    diverged: bool
    wall_time: float = field(default=0.0, compare=False)
    params: Optional[ModelParams] = field(default=None, compare=False, repr=False)

    def metric(self, select_by: Literal["train", "eval"] = "train") -> float:
        return self.final_train_loss if select_by == "train" else self.final_eval_error

    def without_params(self) -> "TrainRecord":
        return dataclasses.replace(self, params=None)

    def to_dict(self) -> dict:
        return {
            "hyperparams": dataclasses.asdict(self.hyperparams),
            "parametrization": dataclasses.asdict(self.parametrization),
            "K": self.K,
            "loss_history": list(self.loss_history),
            "eval_history": list(self.eval_history),
            "eval_epochs": list(self.eval_epochs),
            "initial_train_loss": self.initial_train_loss,
            "initial_eval_error": self.initial_eval_error,
            "final_train_loss": self.final_train_loss,
            "final_eval_error": self.final_eval_error,
            "step_count": self.step_count,
            "diverged": self.diverged,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True, config=ConfigDict(extra="forbid"))
class SweepSpec:
    """The search space of a grid sweep and everything shared by its cells."""

    values: tuple[float, ...]
    K_list: tuple[int, ...]
    axis: SweepAxis = "lr"
    fixed: HyperParams = Field(default_factory=HyperParams)
    parametrization: Parametrization = Field(default_factory=Parametrization)
    model: FnoConfig = Field(default_factory=FnoConfig)
    train_path: Optional[str] = None
    eval_path: Optional[str] = None
    replicate_seeds: tuple[int, ...] = (0, 1, 2)
    select_by: Literal["train", "eval"] = "train"

    @model_validator(mode="after")
    def _check(self) -> "SweepSpec":
        if not self.values:
            raise ValueError("values must not be empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be sorted and free of duplicates")
        if not self.K_list:
            raise ValueError("K_list must not be empty")
        if not self.replicate_seeds:
            raise ValueError("replicate_seeds must not be empty")
        if self.axis == "batch_size" and any(v != int(v) for v in self.values):
            raise ValueError("batch_size values must be integers")
        return self

    def axis_value(self, index: int):
        value = self.values[index]
        return int(value) if self.axis == "batch_size" else float(value)

    def hyperparams_for(
        self, value_index: int, seed: Optional[int] = None
    ) -> HyperParams:
        """The fixed template with the swept field (and optionally seed) set."""
        changes = {self.axis: self.axis_value(value_index)}
        if seed is not None:
            changes["seed"] = seed
        return dataclasses.replace(self.fixed, **changes)

    def config_for(self, K: int) -> FnoConfig:
        return dataclasses.replace(self.model, K=K)

    @property
    def cell_count(self) -> int:
        return len(self.values) * len(self.K_list) * len(self.replicate_seeds)


@std_dataclass
class SweepResult:
    """Records on the grid [value][K][seed] and the per-K optimum.

    ``mean_loss[v, k]`` averages the finite seeds of that cell and is +inf
    only when every seed diverged.
    """

    spec: SweepSpec
    records: list[list[list[TrainRecord]]]
    mean_loss: np.ndarray
    std_loss: np.ndarray
    argmin: tuple[int, ...]

    @property
    def optimal_values(self) -> tuple:
        return tuple(self.spec.axis_value(i) for i in self.argmin)

    def k_index(self, K: int) -> int:
        return self.spec.K_list.index(K)

    def optimal_value(self, K: int):
        return self.spec.axis_value(self.argmin[self.k_index(K)])

    def best_hyperparams(self, K: int) -> HyperParams:
        """Hyperparameters of the winning cell at K, with the template's seed."""
        return self.spec.hyperparams_for(self.argmin[self.k_index(K)])

    def best_records(self, K: int) -> list[TrainRecord]:
        return self.records[self.argmin[self.k_index(K)]][self.k_index(K)]

    def argmin_spread(self) -> int:
        """Largest minus smallest argmin index across K."""
        return max(self.argmin) - min(self.argmin)

    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.mean_loss)))


def aggregate_metric(
    records: list[TrainRecord], select_by: Literal["train", "eval"]
) -> tuple[float, float]:
    """Mean and population std over the seeds that stayed finite.

    Diverged seeds are left out; +inf only when no seed finished.
    """
    values = np.array(
        [r.metric(select_by) for r in records if not r.diverged], dtype=float
    )
    values = values[np.isfinite(values)]
    if values.size == 0:
        return math.inf, math.inf
    return float(values.mean()), float(values.std())
