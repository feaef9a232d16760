"""Synthetic Burgers data: random initial conditions, solver, persistence."""
from mufno.data.burgers import solve_burgers
from mufno.data.dataset import BurgersConfig, Dataset, build_dataset
from mufno.data.grf import GrfParams, sample_grf
from mufno.data.io import load_dataset, save_dataset

__all__ = [
    "BurgersConfig",
    "Dataset",
    "GrfParams",
    "build_dataset",
    "load_dataset",
    "sample_grf",
    "save_dataset",
    "solve_burgers",
]
