"""Output files of CLI commands: CSV tables, JSON documents and run manifests."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import pandas as pd

from mufno import __version__
from mufno.config import ExperimentConfig

_log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical (sorted-key) JSON form of *config*."""
    return sha256_bytes(config.canonical_json().encode())


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(payload: Any, path: str | Path) -> Path:
    """Write *payload* with sorted keys; non-finite floats become strings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(
    rows: pd.DataFrame | Iterable[Sequence[Any]],
    path: str | Path,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(rows, pd.DataFrame):
        frame = rows
    else:
        frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False)
    _log.info("Wrote %s (%d rows)", path, len(frame))
    return path


class RunManifest:
    """Collects the artifacts of one command and writes manifest.json.

    Usage::

        manifest = RunManifest("train", config, output_dir)
        manifest.add(write_csv(...))
        manifest.write()
    """

    def __init__(
        self, command: str, config: ExperimentConfig, output_dir: str | Path
    ) -> None:
        self.command = command
        self.config = config
        self.output_dir = Path(output_dir)
        self.artifacts: list[Path] = []
        self.extra: dict[str, Any] = {}
        self._started = time.perf_counter()

    def add(self, *paths: Path) -> None:
        self.artifacts.extend(Path(p) for p in paths)

    def note(self, **fields: Any) -> None:
        self.extra.update(fields)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "version": __version__,
            "config": self.config.model_dump(mode="json"),
            "config_hash": config_hash(self.config),
            "seed": self.config.train.seed,
            "data_seed": self.config.data.seed,
            "wall_time": time.perf_counter() - self._started,
            "artifacts": [
                {
                    "path": _relative(p, self.output_dir),
                    "sha256": sha256_file(p),
                }
                for p in self.artifacts
            ],
            **self.extra,
        }

    def write(self) -> Path:
        return write_json(self.to_dict(), self.output_dir / MANIFEST_NAME)


def _relative(path: Path, root: Path) -> str:
    try:
        return str(path.resolve().relative_to(root.resolve()))
    except ValueError:
        return str(path)
