"""Shared fixtures: tiny model configs and a tiny Burgers dataset.

The dataset is solved once per session at a grid small enough that the whole
suite stays fast; tests that need files get copies written to their own
temporary directory.
"""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from mufno.data.dataset import BurgersConfig, Dataset, build_dataset
from mufno.data.io import save_dataset
from mufno.model.params import FnoConfig

TINY_BURGERS = {
    "nu": 0.1,
    "grid_n_solver": 128,
    "grid_n_train": 32,
    "T": 1.0,
    "n_train": 16,
    "n_eval": 8,
    "seed": 0,
    "steps": 100,
    "chunk_size": 8,
}
TINY_MODEL = {"L": 2, "m": 8, "K": 4, "activation": "gelu"}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def make_experiment_dict(**sections) -> dict:
    """A schema-valid experiment config at test scale; sections override."""
    raw = {
        "schema_version": 1,
        "model": dict(TINY_MODEL),
        "parametrization": {"kind": "mup", "K0": 4},
        "train": {"lr": 5e-3, "batch_size": 4, "epochs": 3, "clip_value": 0.01},
        "data": dict(TINY_BURGERS),
        "gradcheck": {"n": 32, "samples": 2, "max_entries": 600},
    }
    raw.update(sections)
    return raw


def write_config(path: Path, raw: dict) -> Path:
    path.write_text(json.dumps(raw))
    return path


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture
def tiny_config() -> FnoConfig:
    return FnoConfig(**TINY_MODEL)


@pytest.fixture(scope="session")
def tiny_burgers() -> BurgersConfig:
    return BurgersConfig(**TINY_BURGERS)


@pytest.fixture(scope="session")
def tiny_splits(tiny_burgers) -> dict[str, Dataset]:
    return build_dataset(tiny_burgers)


@pytest.fixture
def tiny_train(tiny_splits) -> Dataset:
    return tiny_splits["train"]


@pytest.fixture
def tiny_eval(tiny_splits) -> Dataset:
    return tiny_splits["eval"]


@pytest.fixture
def tiny_paths(tmp_path, tiny_splits) -> tuple[Path, Path]:
    """The tiny splits saved as FNOD files under tmp_path."""
    train_path = tmp_path / "train.fnod"
    eval_path = tmp_path / "eval.fnod"
    save_dataset(tiny_splits["train"], train_path)
    save_dataset(tiny_splits["eval"], eval_path)
    return train_path, eval_path
