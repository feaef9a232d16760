"""Unit tests for training runs, sweeps, transfer and landscapes.

Sweep logic is exercised with injected fake trainers so argmin selection,
divergence handling and rescaling can be checked without real training.
"""
from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest

from mufno.data.dataset import Dataset
from mufno.errors import DataMissingError, SweepFailureError, TruncationError
from mufno.experiments.landscape import CELL_COLUMNS, SUMMARY_COLUMNS, lr_landscape
from mufno.experiments.records import SweepSpec, TrainRecord
from mufno.experiments.sweep import sweep
from mufno.experiments.trainer import evaluate, train
from mufno.experiments.transfer import mu_transfer, planned_steps
from mufno.model.fno import init_params
from mufno.model.params import FnoConfig
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng
from mufno.training.parametrization import (
    HyperParams,
    Parametrization,
    abc_at,
)

LR_VALUES = (1e-4, 1e-3, 1e-2, 1e-1)
MODEL = FnoConfig(L=1, m=4, K=2)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _make_data(count=10, n=16) -> Dataset:
    rng = np.random.default_rng(0)
    return Dataset(
        rng.standard_normal((count, n, 1)),
        rng.standard_normal((count, n, 1)),
        Grid1D(n),
    )


def _make_record(config, parametrization, xi, loss, *, diverged=False, steps=10):
    final = math.inf if diverged else loss
    return TrainRecord(
        hyperparams=xi,
        parametrization=parametrization,
        K=config.K,
        loss_history=(),
        eval_history=(),
        eval_epochs=(),
        initial_train_loss=1.0,
        initial_eval_error=1.0,
        final_train_loss=final,
        final_eval_error=final,
        step_count=steps,
        diverged=diverged,
    )


def _make_spec(**overrides) -> SweepSpec:
    fields = {
        "values": LR_VALUES,
        "K_list": (2, 4, 8),
        "fixed": HyperParams(batch_size=5, epochs=2),
        "parametrization": Parametrization.mup(K0=2, base_init_std=0.1),
        "model": MODEL,
        "replicate_seeds": (0, 1),
    }
    fields.update(overrides)
    return SweepSpec(**fields)


def _bowl_trainer(best_log_lr):
    """Loss is a parabola in log10(lr) centred at best_log_lr(K)."""

    def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
        loss = (math.log10(xi.lr) - best_log_lr(config.K)) ** 2 + 0.01 * xi.seed
        steps = planned_steps(len(train_ds), xi.batch_size, xi.epochs)
        return _make_record(config, parametrization, xi, loss, steps=steps)

    return trainer


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

class TestSweep:
    def test_argmin_per_K(self):
        data = _make_data()
        trainer = _bowl_trainer(lambda K: -3.0 if K < 8 else -2.0)
        result = sweep(_make_spec(), train_data=data, eval_data=data, trainer=trainer)
        assert result.argmin == (1, 1, 2)
        assert result.optimal_value(8) == pytest.approx(1e-2)
        assert result.argmin_spread() == 1
        assert result.mean_loss.shape == (4, 3)
        assert result.mean_loss[1, 0] == pytest.approx(0.005)

    def test_records_land_in_grid_positions(self):
        data = _make_data()
        trainer = _bowl_trainer(lambda K: -3.0)
        result = sweep(_make_spec(), train_data=data, eval_data=data, trainer=trainer)
        record = result.records[2][1][1]
        assert record.K == 4
        assert record.hyperparams.lr == pytest.approx(1e-2)
        assert record.hyperparams.seed == 1

    def test_ties_go_to_smaller_value(self):
        data = _make_data()

        def flat(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            return _make_record(config, parametrization, xi, 0.5)

        result = sweep(_make_spec(), train_data=data, eval_data=data, trainer=flat)
        assert result.argmin == (0, 0, 0)

    def test_diverged_seed_is_left_out_of_mean(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            diverged = xi.lr == LR_VALUES[0] and xi.seed == 1
            loss = 0.1 + 0.1 * xi.seed
            return _make_record(config, parametrization, xi, loss, diverged=diverged)

        result = sweep(_make_spec(), train_data=data, eval_data=data, trainer=trainer)
        assert result.mean_loss[0] == pytest.approx([0.1, 0.1, 0.1])
        assert result.std_loss[0] == pytest.approx([0.0, 0.0, 0.0])
        assert result.mean_loss[1] == pytest.approx([0.15, 0.15, 0.15])
        assert result.argmin == (0, 0, 0)
        assert result.all_finite()

    def test_finite_seeds_keep_sweep_alive(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            loss = 0.3 if xi.lr == LR_VALUES[0] else 0.2
            return _make_record(
                config, parametrization, xi, loss, diverged=xi.seed == 0
            )

        spec = _make_spec(
            values=LR_VALUES[:2], K_list=(4,), replicate_seeds=(0, 1, 2)
        )
        result = sweep(spec, train_data=data, eval_data=data, trainer=trainer)
        assert result.mean_loss[:, 0] == pytest.approx([0.3, 0.2])
        assert result.argmin == (1,)

    def test_cell_with_every_seed_diverged_is_infinite(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            diverged = xi.lr == LR_VALUES[0]
            return _make_record(config, parametrization, xi, 0.1, diverged=diverged)

        result = sweep(_make_spec(), train_data=data, eval_data=data, trainer=trainer)
        assert np.all(np.isinf(result.mean_loss[0]))
        assert result.argmin == (1, 1, 1)
        assert not result.all_finite()

    def test_all_diverged_raises_naming_K(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            diverged = config.K == 4
            return _make_record(config, parametrization, xi, 0.1, diverged=diverged)

        with pytest.raises(SweepFailureError) as info:
            sweep(_make_spec(), train_data=data, eval_data=data, trainer=trainer)
        assert info.value.K == 4

    def test_non_strict_reports_minus_one(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            diverged = config.K == 4
            return _make_record(config, parametrization, xi, 0.1, diverged=diverged)

        result = sweep(
            _make_spec(), train_data=data, eval_data=data, trainer=trainer, strict=False
        )
        assert result.argmin == (0, -1, 0)

    def test_batch_size_axis(self):
        data = _make_data()
        seen = []

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            seen.append(xi.batch_size)
            return _make_record(config, parametrization, xi, 1.0 / xi.batch_size)

        spec = _make_spec(axis="batch_size", values=(2.0, 5.0), K_list=(2,))
        result = sweep(spec, train_data=data, eval_data=data, trainer=trainer)
        assert set(seen) == {2, 5}
        assert result.optimal_value(2) == 5

    def test_missing_data_raises(self):
        with pytest.raises(DataMissingError):
            sweep(_make_spec(), trainer=_bowl_trainer(lambda K: -3.0))

    def test_unsorted_values_rejected(self):
        with pytest.raises(ValueError):
            _make_spec(values=(1e-2, 1e-3))


# ---------------------------------------------------------------------------
# mu_transfer
# ---------------------------------------------------------------------------

class TestMuTransfer:
    def _run(self, K_target=16, **kwargs):
        calls = []
        bowl = _bowl_trainer(lambda K: -3.0)

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            calls.append((config.K, xi, abc))
            return bowl(train_ds, eval_ds, config, parametrization, xi, abc=abc)

        data = _make_data()
        result = mu_transfer(
            _make_spec(**kwargs),
            K_target,
            train_data=data,
            eval_data=data,
            trainer=trainer,
        )
        return result, calls

    def test_sweeps_only_the_proxy(self):
        result, calls = self._run()
        assert result.K_proxy == 2
        assert [K for K, _, _ in calls[:-1]] == [2] * (len(LR_VALUES) * 2)
        assert calls[-1][0] == 16

    def test_target_hyperparams_are_rescaled(self):
        result, calls = self._run()
        factor = math.sqrt(math.log(2) / math.log(16))
        assert result.xi_star.lr == pytest.approx(1e-3)
        assert result.xi_target.lr == pytest.approx(1e-3)
        assert result.xi_target.spectral_lr_scale == pytest.approx(factor)
        assert result.target_spectral_lr == pytest.approx(1e-3 * factor)
        _, xi, abc = calls[-1]
        assert xi == result.xi_target
        assert abc == result.target_abc

    def test_target_abc_keeps_proxy_a_and_c(self):
        result, _ = self._run()
        factor = math.sqrt(math.log(2) / math.log(16))
        proxy = abc_at(Parametrization.mup(K0=2, base_init_std=0.1), 2)
        assert result.target_abc.a == proxy.a
        assert result.target_abc.c == proxy.c
        assert result.target_abc.b == pytest.approx(proxy.b * factor)

    def test_same_K_transfer_is_identity(self):
        result, _ = self._run(K_target=2)
        assert result.xi_target == result.xi_star
        assert result.target_abc == result.proxy_abc

    def test_transfer_is_cheaper_than_direct_sweep(self):
        result, _ = self._run()
        report = result.cost
        assert report.exhaustive_sweep_steps == report.proxy_sweep_steps
        assert 0.0 < report.ratio < 1.0
        assert report.target_parameters > report.proxy_parameters
        assert set(result.to_dict()["cost_report"]) >= {"ratio", "transfer_cost"}

    def test_explicit_proxy(self):
        calls = []

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            calls.append(config.K)
            return _make_record(config, parametrization, xi, 0.3)

        data = _make_data()
        result = mu_transfer(
            _make_spec(),
            32,
            K_proxy=4,
            train_data=data,
            eval_data=data,
            trainer=trainer,
        )
        assert result.K_proxy == 4
        assert set(calls[:-1]) == {4}

    def test_all_proxy_cells_diverged(self):
        calls = []

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            calls.append(config.K)
            return _make_record(config, parametrization, xi, 0.0, diverged=True)

        data = _make_data()
        with pytest.raises(SweepFailureError):
            mu_transfer(
                _make_spec(), 16, train_data=data, eval_data=data, trainer=trainer
            )
        assert 16 not in calls


# ---------------------------------------------------------------------------
# lr_landscape
# ---------------------------------------------------------------------------

class TestLandscape:
    def test_both_parametrizations_written(self, tmp_path):
        data = _make_data()
        out = lr_landscape(
            _make_spec(),
            parametrizations="both",
            output_dir=tmp_path,
            train_data=data,
            eval_data=data,
            trainer=_bowl_trainer(lambda K: -2.0),
        )
        assert set(out) == {"standard", "mup"}
        for kind in ("standard", "mup"):
            cells = pd.read_csv(tmp_path / f"landscape_{kind}.csv")
            summary = pd.read_csv(tmp_path / f"landscape_{kind}_summary.csv")
            assert list(cells.columns) == CELL_COLUMNS
            assert list(summary.columns) == SUMMARY_COLUMNS
            assert len(cells) == 3 * len(LR_VALUES) * (2 + 1)
            assert len(summary) == 3 * len(LR_VALUES)
            optimal = summary[summary["is_optimal"]]
            assert optimal["value"].tolist() == pytest.approx([1e-2] * 3)
            assert (cells["seed"] == -1).sum() == 3 * len(LR_VALUES)

    def test_diverged_rows_are_infinite(self):
        data = _make_data()

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            diverged = xi.lr >= 1e-1
            return _make_record(config, parametrization, xi, 0.2, diverged=diverged)

        out = lr_landscape(
            _make_spec(), train_data=data, eval_data=data, trainer=trainer
        )
        summary = out["mup"].summary
        assert np.isinf(summary[summary["value"] == 1e-1]["mean_loss"]).all()

    def test_parametrization_kind_is_applied(self):
        data = _make_data()
        kinds = []

        def trainer(train_ds, eval_ds, config, parametrization, xi, *, abc=None):
            kinds.append(parametrization.kind)
            return _make_record(config, parametrization, xi, 0.2)

        lr_landscape(
            _make_spec(K_list=(2,)),
            parametrizations="standard",
            train_data=data,
            eval_data=data,
            trainer=trainer,
        )
        assert set(kinds) == {"standard"}


# ---------------------------------------------------------------------------
# train (real runs on the tiny Burgers data)
# ---------------------------------------------------------------------------

class TestTrain:
    def _xi(self, **kwargs) -> HyperParams:
        fields = {"lr": 1e-2, "batch_size": 4, "epochs": 5, "seed": 3}
        fields.update(kwargs)
        return HyperParams(**fields)

    def test_loss_decreases(self, tiny_train, tiny_eval, tiny_config):
        record = train(
            tiny_train,
            tiny_eval,
            tiny_config,
            Parametrization.mup(K0=4),
            self._xi(),
        )
        assert not record.diverged
        assert record.final_train_loss < record.initial_train_loss
        assert len(record.loss_history) == 5
        assert record.step_count == 5 * 4
        assert record.eval_epochs == (1, 2, 3, 4, 5)

    def test_deterministic(self, tiny_train, tiny_eval, tiny_config):
        args = (tiny_train, tiny_eval, tiny_config, Parametrization.mup(K0=4))
        first = train(*args, self._xi(epochs=2))
        second = train(*args, self._xi(epochs=2))
        assert first == second

    def test_huge_lr_diverges(self, tiny_train, tiny_eval, tiny_config):
        record = train(
            tiny_train,
            tiny_eval,
            tiny_config,
            Parametrization.mup(K0=4),
            self._xi(lr=1e4),
        )
        assert record.diverged
        assert record.final_train_loss == math.inf
        assert record.step_count < 5 * 4

    def test_zero_epochs_reports_initial_errors(
        self, tiny_train, tiny_eval, tiny_config
    ):
        record = train(
            tiny_train,
            tiny_eval,
            tiny_config,
            Parametrization.standard(),
            self._xi(epochs=0),
            keep_params=True,
        )
        assert record.step_count == 0
        assert record.final_train_loss == record.initial_train_loss
        params = init_params(
            tiny_config,
            Parametrization.standard(),
            SeededRng(3).substream("init"),
        )
        assert evaluate(params, tiny_config, tiny_eval) == pytest.approx(
            record.initial_eval_error
        )

    def test_clipping_and_eval_every(self, tiny_train, tiny_eval, tiny_config):
        xi = self._xi(epochs=4, eval_every=2, clip_value=1e-3, clip_placement="update")
        record = train(
            tiny_train, tiny_eval, tiny_config, Parametrization.mup(K0=4), xi
        )
        assert record.eval_epochs == (2, 4)
        assert len(record.eval_history) == 2

    def test_K_too_large_for_grid(self, tiny_train, tiny_eval):
        config = FnoConfig(L=1, m=4, K=32)
        with pytest.raises(TruncationError):
            train(tiny_train, tiny_eval, config, Parametrization.standard(), self._xi())

    def test_sweep_is_independent_of_parallelism(self, tiny_train, tiny_eval):
        spec = _make_spec(
            values=(1e-3, 1e-2),
            K_list=(2, 4),
            fixed=HyperParams(batch_size=8, epochs=1),
            model=FnoConfig(L=1, m=4, K=2),
        )
        serial = sweep(spec, train_data=tiny_train, eval_data=tiny_eval)
        pooled = sweep(spec, train_data=tiny_train, eval_data=tiny_eval, parallelism=2)
        assert serial.argmin == pooled.argmin
        np.testing.assert_array_equal(serial.mean_loss, pooled.mean_loss)
        assert serial.records == pooled.records
