"""Conftest for integration tests: config files wired to the tiny datasets."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from tests.conftest import make_experiment_dict, write_config

TINY_SWEEP = {
    "values": [1e-3, 1e-2],
    "K_list": [2, 4],
    "replicate_seeds": [0],
    "K_target": 8,
}
TINY_COORDCHECK = {"K_list": [2, 4], "steps": 1, "seeds": [0]}
TINY_NORMSCALING = {
    "K_list": [4, 8, 16],
    "d_list": [1],
    "b_list": [1.0, 2.0],
    "n_trials": 50,
}


@pytest.fixture
def experiment(tmp_path, tiny_paths):
    """Factory: write a config pointing at the tiny datasets and return its path."""
    train_path, eval_path = tiny_paths

    def factory(**sections) -> Path:
        raw = make_experiment_dict(
            train_path=str(train_path),
            eval_path=str(eval_path),
            sweep=dict(TINY_SWEEP),
            coordcheck=dict(TINY_COORDCHECK),
            normscaling=dict(TINY_NORMSCALING),
        )
        raw["train"]["epochs"] = 2
        raw.update(sections)
        return write_config(tmp_path / "experiment.json", raw)

    return factory


def read_manifest(output_dir: Path) -> dict:
    return json.loads((output_dir / "manifest.json").read_text())
