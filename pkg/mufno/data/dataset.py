"""Burgers operator-learning datasets: u(., 0) -> u(., T) pairs."""
from __future__ import annotations

import logging
from dataclasses import dataclass as std_dataclass
from typing import Optional

import numpy as np
from pydantic import ConfigDict, Field, model_validator
from pydantic.dataclasses import dataclass

from mufno.data.burgers import solve_burgers
from mufno.data.grf import GrfParams, sample_grf
from mufno.errors import SizeError, SolverDivergenceError
from mufno.numerics.fft import is_power_of_two
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng

_log = logging.getLogger(__name__)


@dataclass(frozen=True, config=ConfigDict(extra="forbid"))
class BurgersConfig:
    nu: float = 0.1
    grid_n_solver: int = 8192
    grid_n_train: int = 1024
    T: float = 1.0
    n_train: int = 800
    n_eval: int = 200
    grf: GrfParams = Field(default_factory=GrfParams)
    seed: int = 0
    steps: int = 2000
    chunk_size: int = 50

    @model_validator(mode="after")
    def _check(self) -> "BurgersConfig":
        for name in ("grid_n_solver", "grid_n_train"):
            value = getattr(self, name)
            if value < 4 or not is_power_of_two(value):
                raise ValueError(f"{name} must be a power of two >= 4, got {value}")
        if self.grid_n_solver % self.grid_n_train:
            raise ValueError("grid_n_train must divide grid_n_solver")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.n_train < 1 or self.n_eval < 1:
            raise ValueError("n_train and n_eval must be >= 1")
        if self.steps < 1 or self.chunk_size < 1:
            raise ValueError("steps and chunk_size must be >= 1")
        return self

    @property
    def stride(self) -> int:
        return self.grid_n_solver // self.grid_n_train


@std_dataclass(frozen=True)
class Dataset:
    """Inputs and targets of shape [N, n, channels] on a shared grid."""

    inputs: np.ndarray
    targets: np.ndarray
    grid: Grid1D
    meta: Optional[BurgersConfig] = None

    def __post_init__(self) -> None:
        if self.inputs.ndim != 3 or self.targets.ndim != 3:
            raise SizeError("inputs and targets must be [N, n, channels]")
        if self.inputs.shape[:2] != self.targets.shape[:2]:
            raise SizeError(
                f"inputs {self.inputs.shape} and targets {self.targets.shape} "
                "disagree on N or n"
            )
        if self.inputs.shape[1] != self.grid.n:
            raise SizeError(
                f"arrays have n={self.inputs.shape[1]}, grid n={self.grid.n}"
            )

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def channels(self) -> int:
        return self.inputs.shape[2]

    def subset(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.inputs[index], self.targets[index], self.grid, self.meta)


def _generate(config: BurgersConfig, rng: SeededRng, count: int, split: str) -> Dataset:
    solver_grid = Grid1D(config.grid_n_solver)
    stride = config.stride
    inputs = np.empty((count, config.grid_n_train, 1))
    targets = np.empty((count, config.grid_n_train, 1))
    for start in range(0, count, config.chunk_size):
        stop = min(count, start + config.chunk_size)
        u0 = np.stack(
            [
                sample_grf(config.grf, solver_grid, rng.substream(i))
                for i in range(start, stop)
            ]
        )
        try:
            uT = solve_burgers(u0, config.nu, config.T, config.steps)
        except SolverDivergenceError as exc:
            index = start + (exc.sample_index or 0)
            _log.error("Burgers solve failed for %s sample %d", split, index)
            raise SolverDivergenceError(
                f"{split} sample {index}: {exc}", sample_index=index
            ) from exc
        inputs[start:stop, :, 0] = u0[:, ::stride]
        targets[start:stop, :, 0] = uT[:, ::stride]
        _log.debug("Solved %s samples %d..%d", split, start, stop - 1)
    return Dataset(inputs, targets, Grid1D(config.grid_n_train), config)


def build_dataset(config: BurgersConfig) -> dict[str, Dataset]:
    """Generate the train and eval splits.

    Each sample draws its initial condition from its own substream, so the
    result does not depend on ``chunk_size``. Fields are solved at
    ``grid_n_solver`` and subsampled by striding to ``grid_n_train``.

    Raises:
        SolverDivergenceError: With the index of the failing sample.
    """
    root = SeededRng(config.seed)
    train = _generate(config, root.substream("train"), config.n_train, "train")
    evaluation = _generate(config, root.substream("eval"), config.n_eval, "eval")
    _log.info(
        "Built Burgers dataset: %d train / %d eval samples on n=%d",
        len(train),
        len(evaluation),
        config.grid_n_train,
    )
    return {"train": train, "eval": evaluation}
