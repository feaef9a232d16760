"""Experiment configuration: one JSON document, validated by pydantic.

Dotted ``--set`` overrides are applied to the fully expanded tree (defaults
included) and the result is validated again, so an override can reach any
field the schema knows but never invent one.
"""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from mufno.data.dataset import BurgersConfig
from mufno.errors import ConfigError
from mufno.experiments.records import SweepAxis, SweepSpec
from mufno.model.params import FnoConfig
from mufno.training.parametrization import HyperParams, Parametrization

_log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_OUTPUT_DIR = "runs"

_STRICT = ConfigDict(extra="forbid", frozen=True)


class SweepSection(BaseModel):
    """Grid shared by sweep, landscape and transfer commands."""

    model_config = _STRICT

    values: tuple[float, ...]
    K_list: tuple[int, ...]
    axis: SweepAxis = "lr"
    replicate_seeds: tuple[int, ...] = (0, 1, 2)
    select_by: Literal["train", "eval"] = "train"
    K_proxy: Optional[int] = None
    K_target: Optional[int] = None


class CoordCheckSection(BaseModel):
    model_config = _STRICT

    K_list: tuple[int, ...] = (8, 16, 32, 64, 128)
    steps: int = Field(default=10, ge=0)
    seeds: tuple[int, ...] = (0, 1, 2)
    init_limit: float = 1.5
    update_limit: float = 2.0


class NormScalingSection(BaseModel):
    model_config = _STRICT

    K_list: tuple[int, ...] = (8, 16, 32, 64, 128)
    d_list: tuple[int, ...] = (1, 2)
    b_list: tuple[float, ...] = (0.5, 1.0, 2.0)
    n_trials: int = Field(default=1000, ge=1)


class GradcheckSection(BaseModel):
    model_config = _STRICT

    tolerance: float = 1e-5
    h: float = 1e-5
    samples: int = Field(default=2, ge=1)
    n: int = 32
    max_entries: Optional[int] = 2000


class ExperimentConfig(BaseModel):
    """Everything a command needs, apart from process-level settings."""

    model_config = _STRICT

    schema_version: Literal[1]
    model: FnoConfig = Field(default_factory=FnoConfig)
    parametrization: Parametrization = Field(default_factory=Parametrization)
    train: HyperParams = Field(default_factory=HyperParams)
    data: BurgersConfig = Field(default_factory=BurgersConfig)
    train_path: Optional[str] = None
    eval_path: Optional[str] = None
    sweep: Optional[SweepSection] = None
    coordcheck: CoordCheckSection = Field(default_factory=CoordCheckSection)
    normscaling: NormScalingSection = Field(default_factory=NormScalingSection)
    gradcheck: GradcheckSection = Field(default_factory=GradcheckSection)
    output_dir: Optional[str] = None
    parallelism: Optional[int] = Field(default=None, ge=1)
    recipe: Literal["custom", "burgers"] = "custom"

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.model.in_channels != 1 or self.model.out_channels != 1:
            raise ValueError("Burgers datasets carry one input and one output channel")
        return self

    @property
    def hyperparams(self) -> HyperParams:
        """``train`` with the Burgers recipe filled in when ``recipe`` asks for it."""
        if self.recipe == "burgers":
            return self.train.with_recipe_defaults()
        return self.train

    def require_sweep(self) -> SweepSection:
        if self.sweep is None:
            raise ConfigError("this command needs a 'sweep' section in the config")
        return self.sweep

    def sweep_spec(self) -> SweepSpec:
        """Combine the sweep grid with the model, schedule and data paths."""
        section = self.require_sweep()
        return SweepSpec(
            values=section.values,
            K_list=section.K_list,
            axis=section.axis,
            fixed=self.hyperparams,
            parametrization=self.parametrization,
            model=self.model,
            train_path=self.train_path,
            eval_path=self.eval_path,
            replicate_seeds=section.replicate_seeds,
            select_by=section.select_by,
        )

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True)


# ---------------------------------------------------------------------------
# Overrides
# ---------------------------------------------------------------------------

def parse_override(text: str) -> tuple[list[str], Any]:
    """Split ``a.b.c=value``; the value is a JSON literal or a bare string."""
    path, sep, raw = text.partition("=")
    if not sep or not path:
        raise ConfigError(f"override must look like key.path=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.split("."), value


def apply_overrides(tree: dict, overrides: Sequence[str]) -> dict:
    """Set each dotted path in *tree*; every path must already exist."""
    for text in overrides:
        keys, value = parse_override(text)
        node = tree
        for depth, key in enumerate(keys[:-1]):
            child = node.get(key) if isinstance(node, dict) else None
            if not isinstance(child, dict):
                where = ".".join(keys[: depth + 1])
                raise ConfigError(f"unknown or unset config section {where!r}")
            node = child
        if keys[-1] not in node:
            raise ConfigError(f"unknown config field {'.'.join(keys)!r}")
        node[keys[-1]] = value
        _log.debug("override %s = %r", ".".join(keys), value)
    return tree


def _validate(tree: Any) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(tree)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigError(f"invalid config at {where}: {first['msg']}") from exc


def build_config(
    raw: dict,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
) -> ExperimentConfig:
    """Validate *raw*, apply overrides and the seed, then validate again.

    Raises:
        ConfigError: Naming the offending field path.
    """
    config = _validate(raw)
    if not overrides and seed is None:
        return config
    tree = config.model_dump(mode="json")
    apply_overrides(tree, overrides)
    if seed is not None:
        tree["train"]["seed"] = seed
        tree["data"]["seed"] = seed
    return _validate(tree)


def load_config(
    path: str | Path,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return build_config(raw, overrides, seed)


# ---------------------------------------------------------------------------
# Process-level settings
# ---------------------------------------------------------------------------

def resolve_parallelism(flag: Optional[int], config: ExperimentConfig) -> int:
    """--parallelism, then the config field, then MUFNO_PARALLELISM, then cores."""
    if flag is not None:
        value = flag
    elif config.parallelism is not None:
        value = config.parallelism
    elif os.getenv("MUFNO_PARALLELISM"):
        try:
            value = int(os.environ["MUFNO_PARALLELISM"])
        except ValueError as exc:
            raise ConfigError("MUFNO_PARALLELISM must be an integer") from exc
    else:
        value = os.cpu_count() or 1
    if value < 1:
        raise ConfigError(f"parallelism must be >= 1, got {value}")
    return value


def resolve_output_dir(flag: Optional[str], config: ExperimentConfig) -> Path:
    """--output, then the config field, then MUFNO_OUTPUT_DIR, then ./runs."""
    chosen = (
        flag
        or config.output_dir
        or os.getenv("MUFNO_OUTPUT_DIR")
        or DEFAULT_OUTPUT_DIR
    )
    return Path(chosen)
