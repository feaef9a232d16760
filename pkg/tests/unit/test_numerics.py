"""Unit tests for the FFT pair, seeded streams, grids and activations."""
from __future__ import annotations

import numpy as np
import pytest

from mufno.errors import SizeError
from mufno.numerics.activations import gelu, gelu_prime, get_activation
from mufno.numerics.fft import fft, ifft, irfft, is_power_of_two, rfft
from mufno.numerics.grid import Grid1D
from mufno.numerics.rng import SeededRng


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _make_signal(shape, seed=0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(shape)


# ---------------------------------------------------------------------------
# fft / ifft
# ---------------------------------------------------------------------------

class TestComplexFft:
    @pytest.mark.parametrize("n", [1, 2, 4, 8, 64, 256])
    def test_matches_reference_dft(self, n):
        x = _make_signal(n) + 1j * _make_signal(n, seed=1)
        np.testing.assert_allclose(fft(x), np.fft.fft(x), atol=1e-10 * n)

    def test_inverse_round_trip(self):
        x = _make_signal((3, 32)) + 1j * _make_signal((3, 32), seed=2)
        np.testing.assert_allclose(ifft(fft(x)), x, atol=1e-12)

    def test_axis_argument(self):
        x = _make_signal((16, 3)).astype(np.complex128)
        np.testing.assert_allclose(fft(x, axis=0), np.fft.fft(x, axis=0), atol=1e-10)

    def test_non_power_of_two_raises(self):
        with pytest.raises(SizeError):
            fft(np.ones(12))


# ---------------------------------------------------------------------------
# rfft / irfft
# ---------------------------------------------------------------------------

class TestRealFft:
    @pytest.mark.parametrize("n", [2, 4, 16, 128, 1024])
    def test_rfft_matches_reference(self, n):
        x = _make_signal(n)
        np.testing.assert_allclose(rfft(x), np.fft.rfft(x), atol=1e-10 * n)

    def test_rfft_of_constant_is_dc_only(self):
        spectrum = rfft(np.full(8, 2.0))
        assert spectrum[0] == pytest.approx(16.0)
        np.testing.assert_allclose(spectrum[1:], 0.0, atol=1e-12)

    def test_irfft_inverts_rfft(self):
        x = _make_signal((4, 64))
        np.testing.assert_allclose(irfft(rfft(x), 64), x, atol=1e-12)

    def test_batched_channels_last(self):
        x = _make_signal((2, 32, 3))
        got = rfft(x, axis=-2)
        np.testing.assert_allclose(got, np.fft.rfft(x, axis=-2), atol=1e-10)
        np.testing.assert_allclose(irfft(got, 32, axis=-2), x, atol=1e-12)

    def test_parseval(self):
        x = _make_signal((3, 64), seed=4)
        X = rfft(x)
        energy = (np.abs(X[:, 0]) ** 2 + np.abs(X[:, -1]) ** 2) + 2 * np.sum(
            np.abs(X[:, 1:-1]) ** 2, axis=-1
        )
        np.testing.assert_allclose(energy / 64, np.sum(x**2, axis=-1), rtol=1e-9)

    def test_rfft_is_linear(self):
        x, y = _make_signal(128, seed=5), _make_signal(128, seed=6)
        np.testing.assert_allclose(
            rfft(2.5 * x - 0.75 * y), 2.5 * rfft(x) - 0.75 * rfft(y), atol=1e-10
        )

    def test_irfft_drops_imaginary_dc_and_nyquist(self):
        spectrum = np.zeros(5, dtype=complex)
        spectrum[0] = 1.0 + 3.0j
        spectrum[4] = 2.0 - 1.0j
        np.testing.assert_allclose(irfft(spectrum, 8), np.fft.irfft(spectrum.real, 8))

    def test_irfft_wrong_bin_count_raises(self):
        with pytest.raises(SizeError):
            irfft(np.zeros(4, dtype=complex), 8)

    def test_rfft_non_power_of_two_raises(self):
        with pytest.raises(SizeError):
            rfft(np.ones(24))

    def test_is_power_of_two(self):
        assert is_power_of_two(1)
        assert is_power_of_two(1024)
        assert not is_power_of_two(0)
        assert not is_power_of_two(96)


# ---------------------------------------------------------------------------
# SeededRng
# ---------------------------------------------------------------------------

class TestSeededRng:
    def test_same_seed_same_draws(self):
        a = SeededRng(7).normal((5, 3))
        b = SeededRng(7).normal((5, 3))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        assert not np.array_equal(SeededRng(1).uniform(8), SeededRng(2).uniform(8))

    def test_substream_independent_of_parent_usage(self):
        parent = SeededRng(3)
        first = parent.substream("x").normal(4)
        parent.normal(1000)
        again = parent.substream("x").normal(4)
        np.testing.assert_array_equal(first, again)

    def test_substreams_with_different_names_differ(self):
        rng = SeededRng(3)
        a, b = rng.substream("a").normal(4), rng.substream("b").normal(4)
        assert not np.array_equal(a, b)

    def test_normal_moments(self):
        z = SeededRng(11).normal(200_000, std=2.0)
        assert abs(z.mean()) < 0.02
        assert z.std() == pytest.approx(2.0, rel=0.01)

    def test_longer_draw_extends_shorter(self):
        short = SeededRng(5).normal(6)
        long = SeededRng(5).normal(10)
        np.testing.assert_array_equal(long[:6], short)

    def test_scalar_normal(self):
        assert np.ndim(SeededRng(0).normal()) == 0

    def test_permutation_is_permutation(self):
        perm = SeededRng(4).permutation(20)
        assert sorted(perm.tolist()) == list(range(20))


# ---------------------------------------------------------------------------
# Grid1D
# ---------------------------------------------------------------------------

class TestGrid1D:
    def test_points_and_spacing(self):
        grid = Grid1D(8)
        np.testing.assert_allclose(grid.points(), np.arange(8) / 8)
        assert grid.max_modes == 4

    def test_downsample(self):
        assert Grid1D(64).downsample(4) == Grid1D(16)

    @pytest.mark.parametrize("n", [2, 12, 100])
    def test_invalid_sizes_rejected(self, n):
        with pytest.raises(SizeError):
            Grid1D(n)

    def test_bad_downsample_factor(self):
        with pytest.raises(SizeError):
            Grid1D(16).downsample(3)


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

class TestActivations:
    def test_gelu_known_values(self):
        assert gelu(np.array(0.0)) == 0.0
        assert gelu(np.array(1.0)) == pytest.approx(0.8413447460685429)
        assert gelu(np.array(-1.0)) == pytest.approx(-0.15865525393145707)

    @pytest.mark.parametrize("name", ["gelu", "tanh", "identity"])
    def test_derivative_matches_central_difference(self, name):
        act = get_activation(name)
        x = np.linspace(-4, 4, 41)
        h = 1e-6
        numeric = (act.fn(x + h) - act.fn(x - h)) / (2 * h)
        np.testing.assert_allclose(act.prime(x), numeric, atol=1e-8)

    def test_gelu_prime_at_zero_is_half(self):
        assert gelu_prime(np.array(0.0)) == pytest.approx(0.5)

    def test_unknown_activation(self):
        with pytest.raises(KeyError, match="relu"):
            get_activation("relu")
