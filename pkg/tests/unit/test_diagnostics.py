"""Unit tests for the spectral norm, max-Gaussian scaling and coordinate checks."""
from __future__ import annotations

import math

import numpy as np
import pytest

from mufno.diagnostics.coord_check import (
    CSV_COLUMNS,
    FeatureTrace,
    coord_check,
    rms,
    summarize,
    traces_table,
)
from mufno.diagnostics.max_gaussian import max_gaussian_mc, norm_scaling
from mufno.diagnostics.spectral_norm import (
    max_mode_norm,
    power_iteration,
    spectral_norm_exact,
)
from mufno.errors import ConvergenceError, DomainError, SizeError, TruncationError
from mufno.model.params import SpectralConvParams
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng
from mufno.training.parametrization import HyperParams, Parametrization


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _make_spectral(K: int, m: int = 1, seed: int = 0, real=False):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((K, m, m)) + 1j * rng.standard_normal((K, m, m))
    r[0] = r[0].real
    return SpectralConvParams(r=r, a_scale=1.0, real_r_mode=real)


def _make_trace(K, seed, w_init, dw_t=(0.0,)):
    return FeatureTrace(
        parametrization="mup",
        K=K,
        seed=seed,
        steps=1,
        h_init=(1.0, 1.0),
        w_init=tuple(w_init),
        dw_t=tuple(dw_t),
        dKh_t=tuple(dw_t),
    )


# ---------------------------------------------------------------------------
# power_iteration / spectral_norm_exact
# ---------------------------------------------------------------------------

class TestPowerIteration:
    def test_matches_svd(self):
        A = np.random.default_rng(0).standard_normal((30, 20))
        assert power_iteration(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-9)

    def test_zero_matrix(self):
        assert power_iteration(np.zeros((8, 8))) == 0.0

    def test_stalls_raise_with_residual(self):
        A = np.random.default_rng(1).standard_normal((64, 64))
        with pytest.raises(ConvergenceError) as info:
            power_iteration(A, max_iter=1, block=2)
        assert info.value.residual > 0


class TestSpectralNorm:
    @pytest.mark.parametrize("K", [2, 8, 16])
    def test_dense_norm_is_max_mode_norm(self, K):
        params = _make_spectral(K, seed=K)
        norm = spectral_norm_exact(params, Grid1D(64))
        assert norm == pytest.approx(max_mode_norm(params), rel=1e-8)

    def test_worked_example(self):
        r = np.array([0.5, -2.0, 1.0]).reshape(3, 1, 1).astype(complex)
        params = SpectralConvParams(r=r, a_scale=1.0, real_r_mode=True)
        assert spectral_norm_exact(params, Grid1D(16)) == pytest.approx(2.0, abs=1e-8)

    @pytest.mark.parametrize("real", [False, True])
    def test_identity_holds_over_random_draws(self, real):
        rng = np.random.default_rng(11)
        for K in (2, 8, 16):
            for _ in range(100):
                r = rng.standard_normal((K, 1, 1)) + 1j * rng.standard_normal((K, 1, 1))
                r[0] = r[0].real
                params = SpectralConvParams(r=r, a_scale=1.0, real_r_mode=real)
                assert spectral_norm_exact(params, Grid1D(64)) == pytest.approx(
                    max_mode_norm(params), rel=1e-8
                )

    def test_multi_channel(self):
        params = _make_spectral(4, m=3, seed=7)
        norm = spectral_norm_exact(params, Grid1D(16))
        assert norm == pytest.approx(max_mode_norm(params), rel=1e-8)

    def test_real_mode_uses_real_part(self):
        params = _make_spectral(4, seed=3, real=True)
        expected = float(np.max(np.abs(params.r.real)))
        assert max_mode_norm(params) == pytest.approx(expected)
        assert spectral_norm_exact(params, Grid1D(16)) == pytest.approx(
            expected, rel=1e-8
        )

    def test_truncation(self):
        with pytest.raises(TruncationError):
            spectral_norm_exact(_make_spectral(9), Grid1D(16))

    def test_dense_size_limit(self):
        with pytest.raises(SizeError):
            spectral_norm_exact(_make_spectral(2, m=2), Grid1D(4096))


# ---------------------------------------------------------------------------
# max_gaussian_mc / norm_scaling
# ---------------------------------------------------------------------------

class TestMaxGaussian:
    def test_mean_is_close_to_prediction(self):
        row = max_gaussian_mc(1024, 1, 1.0, 400, SeededRng(0))
        # the Gumbel correction keeps the mean a little under the prediction
        assert 0.8 * row.predicted < row.mean_max_abs < row.predicted

    def test_scales_linearly_in_b(self):
        one = max_gaussian_mc(16, 1, 1.0, 200, SeededRng(5))
        three = max_gaussian_mc(16, 1, 3.0, 200, SeededRng(5))
        assert three.mean_max_abs == pytest.approx(3 * one.mean_max_abs)

    def test_regressor(self):
        row = max_gaussian_mc(8, 2, 0.5, 10, SeededRng(0))
        assert row.regressor == pytest.approx(0.5 * math.sqrt(2 * math.log(8)))

    def test_K_one_raises(self):
        with pytest.raises(DomainError):
            max_gaussian_mc(1, 1, 1.0, 10, SeededRng(0))

    def test_too_many_variables(self):
        with pytest.raises(SizeError):
            max_gaussian_mc(5000, 2, 1.0, 1, SeededRng(0))

    def test_norm_scaling_fit(self):
        report = norm_scaling(
            (8, 16, 32, 64, 128), (1, 2), (0.5, 1.0, 2.0), 1000, SeededRng(0)
        )
        assert len(report.rows) == 30
        assert 1.2 <= report.slope <= 1.6
        assert report.r_squared > 0.99
        assert report.mup_spread is not None
        assert report.mup_spread <= 1.10

    def test_oversized_cells_are_skipped(self):
        report = norm_scaling(
            (4, 8192), (1, 2), (1.0,), 20, SeededRng(0), with_mup_spread=False
        )
        assert [(r.K, r.d) for r in report.rows] == [(4, 1), (8192, 1), (4, 2)]
        assert report.mup_spread is None


# ---------------------------------------------------------------------------
# Coordinate checks
# ---------------------------------------------------------------------------

class TestCoordCheck:
    def test_zero_steps_have_no_updates(self, tiny_train, tiny_config):
        traces, summary = coord_check(
            tiny_config,
            Parametrization.mup(K0=4),
            (4, 8),
            0,
            tiny_train,
            seeds=(0,),
        )
        assert len(traces) == 2
        for trace in traces:
            assert trace.dw_t == (0.0, 0.0)
            assert trace.dKh_t == (0.0, 0.0)
        assert summary.dw_ratio == (1.0, 1.0)
        assert summary.stable_updates

    def test_lifted_features_do_not_depend_on_K(self, tiny_train, tiny_config):
        traces, _ = coord_check(
            tiny_config,
            Parametrization.mup(K0=4),
            (2, 4, 8),
            1,
            tiny_train,
            xi=HyperParams(lr=1e-3, batch_size=4),
            seeds=(0, 1),
        )
        first_layer = {(t.K, t.seed): t.h_init[0] for t in traces}
        assert first_layer[(2, 0)] == first_layer[(8, 0)]
        assert all(len(t.h_init) == tiny_config.L + 1 for t in traces)
        assert all(t.dw_t[0] > 0 for t in traces)

    def test_table_layout(self, tiny_train, tiny_config):
        traces, _ = coord_check(
            tiny_config, Parametrization.standard(), (4,), 1, tiny_train, seeds=(0,)
        )
        table = traces_table(traces)
        assert list(table.columns) == CSV_COLUMNS
        L = tiny_config.L
        assert len(table) == (L + 1) + 3 * L
        assert set(table["quantity"]) == {"h_init", "w_init", "dw_t", "dKh_t"}
        assert (table["parametrization"] == "standard").all()

    def test_K_too_large(self, tiny_train, tiny_config):
        with pytest.raises(TruncationError):
            coord_check(
                tiny_config, Parametrization.mup(K0=4), (4, 32), 1, tiny_train
            )

    def test_summary_ratios(self):
        traces = [
            _make_trace(4, 0, (1.0,), (0.2,)),
            _make_trace(4, 1, (3.0,), (0.4,)),
            _make_trace(16, 0, (4.0,), (0.9,)),
        ]
        summary = summarize(traces)
        assert summary.w_init_ratio == (2.0,)
        assert summary.dw_ratio == pytest.approx((3.0,))
        assert not summary.stable_at_init
        assert not summary.stable_updates

    def test_zero_minimum_ratio_is_infinite(self):
        summary = summarize(
            [_make_trace(4, 0, (1.0,), (0.0,)), _make_trace(8, 0, (1.0,), (1.0,))]
        )
        assert summary.dw_ratio == (math.inf,)
        assert summary.stable_at_init

    def test_rms(self):
        assert rms(np.array([[3.0, -3.0], [3.0, 3.0]])) == 3.0
