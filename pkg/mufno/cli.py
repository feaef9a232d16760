"""Command-line surface: one function per command, JSON config in, files out.

Every command writes its artifacts plus ``manifest.json`` into the output
directory and returns a process exit code. Errors raised by the library are
mapped to exit codes here and nowhere else.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from mufno import __version__
from mufno.artifacts import RunManifest, write_csv, write_json
from mufno.config import (
    ExperimentConfig,
    load_config,
    resolve_output_dir,
    resolve_parallelism,
)
from mufno.data.dataset import Dataset, build_dataset
from mufno.data.grf import sample_grf
from mufno.data.io import load_dataset, save_dataset
from mufno.diagnostics.coord_check import coord_check, summarize, traces_table
from mufno.diagnostics.max_gaussian import norm_scaling
from mufno.errors import EXIT_INTERNAL, ConfigError, DataMissingError, exit_code_for
from mufno.experiments.landscape import cell_table, lr_landscape
from mufno.experiments.trainer import train
from mufno.experiments.transfer import mu_transfer
from mufno.model.checkpoint import save_checkpoint
from mufno.model.fno import init_params
from mufno.model.gradcheck import gradcheck
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng
from mufno.training.parametrization import abc_at

_log = logging.getLogger(__name__)

EXIT_GRADCHECK_FAILED = 1
HISTORY_COLUMNS = ["epoch", "train_loss", "eval_error"]
NORM_COLUMNS = ["K", "d", "b", "trials", "mean_max_abs", "predicted", "regressor"]


@dataclasses.dataclass
class Context:
    """What every command receives after config loading."""

    config: ExperimentConfig
    output_dir: Path
    parallelism: int
    args: argparse.Namespace

    def manifest(self, command: str) -> RunManifest:
        return RunManifest(command, self.config, self.output_dir)


def _check_modes(K_values: Sequence[int], n: int, where: str) -> None:
    """Raise ConfigError if some K does not fit a grid of n points."""
    too_large = [K for K in K_values if K > n // 2]
    if too_large:
        raise ConfigError(
            f"{where}: K={max(too_large)} exceeds n/2={n // 2} of the {n}-point grid"
        )


def _load_data(
    config: ExperimentConfig, K_values: Sequence[int]
) -> tuple[Dataset, Dataset]:
    if config.train_path is None or config.eval_path is None:
        raise DataMissingError(
            "train_path and eval_path must be set (run gen-data first)"
        )
    train_ds = load_dataset(config.train_path)
    eval_ds = load_dataset(config.eval_path)
    for ds in (train_ds, eval_ds):
        _check_modes(K_values, ds.grid.n, "model.K")
    return train_ds, eval_ds


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen_data(ctx: Context) -> int:
    splits = build_dataset(ctx.config.data)
    manifest = ctx.manifest("gen-data")
    crcs = {}
    for name, ds in splits.items():
        path = ctx.output_dir / f"{name}.fnod"
        crcs[name] = f"{save_dataset(ds, path):016x}"
        manifest.add(path)
    manifest.note(crc64=crcs)
    manifest.write()
    return 0


def cmd_train(ctx: Context) -> int:
    config = ctx.config
    train_ds, eval_ds = _load_data(config, [config.model.K])
    record = train(
        train_ds,
        eval_ds,
        config.model,
        config.parametrization,
        config.hyperparams,
        keep_params=True,
    )
    manifest = ctx.manifest("train")
    manifest.add(write_json(record.to_dict(), ctx.output_dir / "train_record.json"))

    evals = dict(zip(record.eval_epochs, record.eval_history))
    rows = [
        [epoch, loss, evals.get(epoch, math.nan)]
        for epoch, loss in enumerate(record.loss_history, start=1)
    ]
    manifest.add(write_csv(rows, ctx.output_dir / "history.csv", HISTORY_COLUMNS))

    if record.diverged:
        _log.warning("Run diverged; no checkpoint written")
    else:
        path = ctx.output_dir / "checkpoint.mufn"
        save_checkpoint(path, config.model, record.params)
        manifest.add(path)
    manifest.note(diverged=record.diverged)
    manifest.write()
    return 0


def _landscape_command(ctx: Context, command: str) -> int:
    spec = ctx.config.sweep_spec()
    train_ds, eval_ds = _load_data(ctx.config, spec.K_list)
    landscapes = lr_landscape(
        spec,
        parametrizations=ctx.args.parametrization,
        output_dir=ctx.output_dir,
        train_data=train_ds,
        eval_data=eval_ds,
        parallelism=ctx.parallelism,
    )
    manifest = ctx.manifest(command)
    optima = {}
    for label, landscape in landscapes.items():
        manifest.add(
            ctx.output_dir / f"landscape_{label}.csv",
            ctx.output_dir / f"landscape_{label}_summary.csv",
        )
        result = landscape.result
        optima[label] = {
            str(K): (result.optimal_value(K) if result.argmin[k] >= 0 else None)
            for k, K in enumerate(spec.K_list)
        }
    manifest.add(write_json(optima, ctx.output_dir / "optima.json"))
    manifest.write()
    return 0


def cmd_sweep(ctx: Context) -> int:
    return _landscape_command(ctx, "sweep")


def cmd_landscape(ctx: Context) -> int:
    return _landscape_command(ctx, "landscape")


def cmd_transfer(ctx: Context) -> int:
    config = ctx.config
    section = config.require_sweep()
    K_target = ctx.args.k_target or section.K_target
    if K_target is None:
        raise ConfigError("transfer needs sweep.K_target or --k-target")
    K_proxy = ctx.args.k_proxy or section.K_proxy
    spec = config.sweep_spec()
    modes = [K_target, K_proxy if K_proxy is not None else min(spec.K_list)]
    train_ds, eval_ds = _load_data(config, modes)
    result = mu_transfer(
        spec,
        K_target,
        K_proxy=K_proxy,
        train_data=train_ds,
        eval_data=eval_ds,
        parallelism=ctx.parallelism,
    )
    out = ctx.output_dir
    manifest = ctx.manifest("transfer")
    manifest.add(
        write_json(result.to_dict(), out / "xi_star.json"),
        write_json(result.target_record.to_dict(), out / "target_record.json"),
        write_csv(
            cell_table(result.proxy_sweep, config.parametrization.kind),
            ctx.output_dir / "proxy_sweep.csv",
        ),
    )
    manifest.note(cost_ratio=result.cost.ratio)
    manifest.write()
    return 0


def _kinds(choice: str, config: ExperimentConfig) -> tuple[str, ...]:
    if choice == "both":
        return ("standard", "mup")
    if choice == "spec":
        return (config.parametrization.kind,)
    return (choice,)


def cmd_coordcheck(ctx: Context) -> int:
    config = ctx.config
    section = config.coordcheck
    dataset, _ = _load_data(config, section.K_list)
    traces, summaries = [], {}
    for kind in _kinds(ctx.args.parametrization, config):
        parametrization = dataclasses.replace(config.parametrization, kind=kind)
        found, _ = coord_check(
            config.model,
            parametrization,
            section.K_list,
            section.steps,
            dataset,
            xi=config.hyperparams,
            seeds=section.seeds,
        )
        summary = summarize(found, section.init_limit, section.update_limit)
        summaries[kind] = {
            **dataclasses.asdict(summary),
            "stable_at_init": summary.stable_at_init,
            "stable_updates": summary.stable_updates,
        }
        traces.extend(found)
    manifest = ctx.manifest("coordcheck")
    manifest.add(
        write_csv(traces_table(traces), ctx.output_dir / "coordcheck.csv"),
        write_json(summaries, ctx.output_dir / "coordcheck_summary.json"),
    )
    manifest.write()
    return 0


def cmd_normscaling(ctx: Context) -> int:
    section = ctx.config.normscaling
    rng = SeededRng(ctx.config.train.seed).substream("normscaling")
    report = norm_scaling(
        section.K_list, section.d_list, section.b_list, section.n_trials, rng
    )
    rows = [
        [r.K, r.d, r.b, r.trials, r.mean_max_abs, r.predicted, r.regressor]
        for r in report.rows
    ]
    fit = {
        "slope": report.slope,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "mup_spread": report.mup_spread,
        "predicted_slope": math.sqrt(2.0),
    }
    manifest = ctx.manifest("normscaling")
    manifest.add(
        write_csv(rows, ctx.output_dir / "normscaling.csv", NORM_COLUMNS),
        write_json(fit, ctx.output_dir / "normscaling_fit.json"),
    )
    manifest.write()
    return 0


def cmd_gradcheck(ctx: Context) -> int:
    config = ctx.config
    section = config.gradcheck
    model = config.model
    _check_modes([model.K], section.n, "gradcheck.n")
    rng = SeededRng(config.train.seed).substream("gradcheck")
    grid = Grid1D(section.n)
    inputs = sample_grf(
        config.data.grf, grid, rng.substream("inputs"), section.samples
    )
    targets = sample_grf(
        config.data.grf, grid, rng.substream("targets"), section.samples
    )
    abc = abc_at(config.parametrization, model.K, model.m)
    params = init_params(model, config.parametrization, rng.substream("init"), abc=abc)
    report = gradcheck(
        params,
        model,
        inputs[..., np.newaxis],
        targets[..., np.newaxis],
        section.tolerance,
        h=section.h,
        max_entries=section.max_entries,
        seed=config.train.seed,
    )
    manifest = ctx.manifest("gradcheck")
    manifest.add(write_json(report.to_dict(), ctx.output_dir / "gradcheck.json"))
    manifest.write()
    verdict = "pass" if report.passed else "FAIL"
    print(f"max_rel_err={report.max_rel_err:.3e} ({report.worst_tensor}) {verdict}")
    return 0 if report.passed else EXIT_GRADCHECK_FAILED


COMMANDS: dict[str, Callable[[Context], int]] = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "transfer": cmd_transfer,
    "landscape": cmd_landscape,
    "coordcheck": cmd_coordcheck,
    "normscaling": cmd_normscaling,
    "gradcheck": cmd_gradcheck,
}


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mufno",
        description="Train FNOs, sweep hyperparameters and transfer them across K.",
    )
    parser.add_argument("--version", action="version", version=f"mufno {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment JSON file")
    common.add_argument("--seed", type=int, help="override train.seed and data.seed")
    common.add_argument("--parallelism", type=int, help="worker processes for sweeps")
    common.add_argument("--output", help="output directory (created if missing)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY.PATH=VALUE",
        help="override a config field; the value is parsed as JSON when possible",
    )

    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common])
        if name in ("sweep", "landscape", "coordcheck"):
            cmd.add_argument(
                "--parametrization",
                choices=("spec", "standard", "mup", "both"),
                default="both" if name == "landscape" else "spec",
                help="'spec' uses the config's parametrization as is",
            )
        if name == "transfer":
            cmd.add_argument("--k-target", type=int, dest="k_target")
            cmd.add_argument("--k-proxy", type=int, dest="k_proxy")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides, args.seed)
        ctx = Context(
            config=config,
            output_dir=resolve_output_dir(args.output, config),
            parallelism=resolve_parallelism(args.parallelism, config),
            args=args,
        )
        ctx.output_dir.mkdir(parents=True, exist_ok=True)
        _log.info("Running %s into %s", args.command, ctx.output_dir)
        return COMMANDS[args.command](ctx)
    except Exception as exc:
        code = exit_code_for(exc)
        if code == EXIT_INTERNAL:
            _log.exception("Unexpected failure in %s", args.command)
        print(f"mufno {args.command}: {exc}", file=sys.stderr)
        return code
