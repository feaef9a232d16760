"""Zero-shot transfer: sweep a small-K proxy, rescale, train the target once."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

from mufno.errors import DomainError
from mufno.experiments.records import SweepResult, SweepSpec, TrainRecord
from mufno.experiments.sweep import Trainer, resolve_sweep_data, sweep
from mufno.experiments.trainer import DataSource, train
from mufno.model.params import FnoConfig, parameter_count
from mufno.training.parametrization import (
    Abc,
    HyperParams,
    abc_at,
    rescale_hyperparams,
)

_log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Cost accounting
# ---------------------------------------------------------------------------

def step_cost(config: FnoConfig, n: int, batch_size: int) -> float:
    """Relative flop proxy of one optimizer step.

    batch * n * (L * (K m^2 + n log2(n) m) + n m^2); only ratios are meaningful.
    """
    m, L, K = config.m, config.L, config.K
    return float(batch_size * n * (L * (K * m * m + n * math.log2(n) * m) + n * m * m))


def planned_steps(n_samples: int, batch_size: int, epochs: int) -> int:
    return epochs * math.ceil(n_samples / batch_size)


def sweep_cost(result: SweepResult, n: int) -> tuple[int, float]:
    """Total steps and cost actually spent by a sweep."""
    steps, cost = 0, 0.0
    spec = result.spec
    for per_value in result.records:
        for k, per_k in enumerate(per_value):
            config = spec.config_for(spec.K_list[k])
            for record in per_k:
                steps += record.step_count
                cost += record.step_count * step_cost(
                    config, n, record.hyperparams.batch_size
                )
    return steps, cost


@dataclass(frozen=True)
class CostReport:
    proxy_sweep_steps: int
    proxy_sweep_cost: float
    target_steps: int
    target_cost: float
    exhaustive_sweep_steps: int
    exhaustive_sweep_cost: float
    proxy_parameters: int
    target_parameters: int
    target_spectral_fraction: float

    @property
    def transfer_cost(self) -> float:
        return self.proxy_sweep_cost + self.target_cost

    @property
    def ratio(self) -> float:
        """Transfer cost as a fraction of sweeping directly at the target."""
        if self.exhaustive_sweep_cost == 0:
            return math.inf
        return self.transfer_cost / self.exhaustive_sweep_cost

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["transfer_cost"] = self.transfer_cost
        out["ratio"] = self.ratio
        return out


def cost_report(
    proxy: SweepResult,
    target_record: TrainRecord,
    target_config: FnoConfig,
    n: int,
    n_samples: int,
) -> CostReport:
    """Compare proxy sweep plus one target run with a full target sweep.

    The hypothetical full sweep uses the planned step count of every
    (value, seed) cell at the target config.
    """
    spec = proxy.spec
    proxy_steps, proxy_cost = sweep_cost(proxy, n)
    target_cost = target_record.step_count * step_cost(
        target_config, n, target_record.hyperparams.batch_size
    )
    full_steps, full_cost = 0, 0.0
    for v in range(len(spec.values)):
        xi = spec.hyperparams_for(v)
        steps = planned_steps(n_samples, xi.batch_size, xi.epochs)
        runs = steps * len(spec.replicate_seeds)
        full_steps += runs
        full_cost += runs * step_cost(target_config, n, xi.batch_size)
    proxy_count = parameter_count(spec.config_for(spec.K_list[0]))
    target_count = parameter_count(target_config)
    return CostReport(
        proxy_sweep_steps=proxy_steps,
        proxy_sweep_cost=proxy_cost,
        target_steps=target_record.step_count,
        target_cost=target_cost,
        exhaustive_sweep_steps=full_steps,
        exhaustive_sweep_cost=full_cost,
        proxy_parameters=proxy_count.total,
        target_parameters=target_count.total,
        target_spectral_fraction=target_count.spectral_fraction,
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferResult:
    K_proxy: int
    K_target: int
    xi_star: HyperParams
    xi_target: HyperParams
    proxy_abc: Abc
    target_abc: Abc
    proxy_sweep: SweepResult
    target_record: TrainRecord
    cost: CostReport

    @property
    def target_spectral_lr(self) -> float:
        """R learning rate before c(K): lr* * sqrt(log K_proxy / log K_target)."""
        return self.xi_target.spectral_lr

    def to_dict(self) -> dict:
        return {
            "K_proxy": self.K_proxy,
            "K_target": self.K_target,
            "xi_star": dataclasses.asdict(self.xi_star),
            "xi_target": dataclasses.asdict(self.xi_target),
            "target_spectral_lr": self.target_spectral_lr,
            "target_effective_spectral_lr": self.target_spectral_lr * self.target_abc.c,
            "proxy_abc": dataclasses.asdict(self.proxy_abc),
            "target_abc": dataclasses.asdict(self.target_abc),
            "target_init_std": self.target_abc.b,
            "cost_report": self.cost.to_dict(),
        }


def mu_transfer(
    spec: SweepSpec,
    K_target: int,
    *,
    K_proxy: Optional[int] = None,
    train_data: Optional[DataSource] = None,
    eval_data: Optional[DataSource] = None,
    parallelism: int = 1,
    trainer: Trainer = train,
) -> TransferResult:
    """Sweep at K_proxy, rescale the winner to K_target and train it once.

    K_proxy defaults to the smallest K in ``spec.K_list``. The target keeps the
    proxy's forward multiplier a and lr multiplier c; its R learning rate
    and init std pick up sqrt(log K_proxy / log K_target).

    Raises:
        DomainError: If either mode count is below 2.
        SweepFailureError: If every proxy cell diverged; no target is trained.
    """
    K_proxy = K_proxy if K_proxy is not None else min(spec.K_list)
    if K_proxy < 2 or K_target < 2:
        raise DomainError(f"transfer needs K >= 2, got {K_proxy} -> {K_target}")
    train_ds, eval_ds = resolve_sweep_data(spec, train_data, eval_data)
    proxy_spec = dataclasses.replace(spec, K_list=(K_proxy,))

    result = sweep(
        proxy_spec,
        train_data=train_ds,
        eval_data=eval_ds,
        parallelism=parallelism,
        trainer=trainer,
    )
    xi_star = result.best_hyperparams(K_proxy)
    proxy_abc = abc_at(spec.parametrization, K_proxy, spec.model.m)
    rescaled = rescale_hyperparams(
        xi_star, proxy_abc.b, K_proxy, K_target, spec.parametrization.d
    )
    target_abc = Abc(a=proxy_abc.a, b=rescaled.init_std, c=proxy_abc.c)
    _log.info(
        "Transferring %s=%s from K=%d to K=%d (R-lr %.4g -> %.4g)",
        spec.axis,
        result.optimal_value(K_proxy),
        K_proxy,
        K_target,
        xi_star.spectral_lr,
        rescaled.xi.spectral_lr,
    )

    target_config = spec.config_for(K_target)
    target_record = trainer(
        train_ds,
        eval_ds,
        target_config,
        spec.parametrization,
        rescaled.xi,
        abc=target_abc,
    )
    report = cost_report(
        result, target_record, target_config, train_ds.grid.n, len(train_ds)
    )
    _log.info("Transfer cost ratio vs direct sweep: %.3f", report.ratio)
    return TransferResult(
        K_proxy=K_proxy,
        K_target=K_target,
        xi_star=xi_star,
        xi_target=rescaled.xi,
        proxy_abc=proxy_abc,
        target_abc=target_abc,
        proxy_sweep=result,
        target_record=target_record,
        cost=report,
    )
