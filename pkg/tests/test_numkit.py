import numpy as np
import pytest
from fractions import Fraction

from fracpon.numkit import (
    ComplexBuf,
    OverlapSaveConfig,
    dft,
    idft,
    fd_kernel_from_taps,
    fractional_delay,
    lagrange_weights,
    overlap_save,
    resample_rational,
    rrc_taps,
)

from oracles import naive_dft, direct_fir, tone_peak, ideal_fractional_delay

RMS_TOL = 1e-9


def rms(a):
    return float(np.sqrt(np.mean(np.abs(np.asarray(a)) ** 2)))


class TestDft:
    def test_impulse_gives_flat_spectrum(self):
        x = np.zeros(8, dtype=complex)
        x[0] = 1.0
        np.testing.assert_allclose(dft(x), np.ones(8), atol=1e-12)

    def test_dc_concentration_size_250(self):
        x = np.ones(250, dtype=complex)
        spec = dft(x)
        assert abs(spec[0] - 250.0) < 1e-9
        assert np.max(np.abs(spec[1:])) < 1e-9

    @pytest.mark.parametrize("size", [250, 252, 256, 30, 97, 128])
    def test_matches_direct_summation(self, size):
        rng = np.random.default_rng(42 + size)
        x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        assert rms(dft(x) - naive_dft(x)) < RMS_TOL * np.sqrt(size)
        assert rms(dft(x, inverse=True) - naive_dft(x, inverse=True)) < RMS_TOL

    @pytest.mark.parametrize("size", [250, 252, 256])
    def test_round_trip(self, size):
        rng = np.random.default_rng(size)
        x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        assert rms(idft(dft(x)) - x) < RMS_TOL

    @pytest.mark.parametrize("size", [250, 252, 256])
    def test_parseval(self, size):
        rng = np.random.default_rng(7 * size)
        x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        t_energy = np.sum(np.abs(x) ** 2)
        f_energy = np.sum(np.abs(dft(x)) ** 2) / size
        assert abs(t_energy - f_energy) / t_energy < 1e-6

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            dft(np.ones(10, dtype=complex), 12)

    def test_batched_input(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((5, 252)) + 1j * rng.standard_normal((5, 252))
        out = dft(x)
        for row_in, row_out in zip(x, out):
            assert rms(row_out - naive_dft(row_in)) < RMS_TOL * 16

    def test_complexbuf_round_trip(self):
        rng = np.random.default_rng(11)
        x = ComplexBuf(rng.standard_normal(64) + 0j, Fraction(9, 8))
        out = dft(x)
        assert isinstance(out, ComplexBuf)
        assert out.rate_sps == Fraction(9, 8)


class TestRrcTaps:
    def test_symmetry_exact(self):
        taps = rrc_taps(0.1, Fraction(9, 8), 32)
        assert len(taps) % 2 == 1
        np.testing.assert_array_equal(taps, taps[::-1])

    def test_unit_energy(self):
        taps = rrc_taps(0.1, 4, 32)
        assert abs(np.sum(taps**2) - 1.0) < 1e-12

    def test_beta_zero_is_sinc(self):
        taps = rrc_taps(0.0, 4, 16)
        half = len(taps) // 2
        t = (np.arange(len(taps)) - half) / 4.0
        expected = np.sinc(t)
        expected /= np.sqrt(np.sum(expected**2))
        np.testing.assert_allclose(taps, expected, atol=1e-12)

    def test_invalid_beta_rejected(self):
        with pytest.raises(ValueError):
            rrc_taps(-0.1, 2, 16)
        with pytest.raises(ValueError):
            rrc_taps(1.5, 2, 16)

    @pytest.mark.parametrize("sps", [2, 4, Fraction(9, 8), Fraction(5, 4)])
    def test_cascade_isi_below_minus_40db(self, sps):
        # two cascaded RRC(0.1) filters form a raised-cosine Nyquist pulse
        taps = rrc_taps(0.1, sps, 32)
        rc = np.convolve(taps, taps)
        center = len(rc) // 2
        num, den = Fraction(sps).numerator, Fraction(sps).denominator
        # symbol instants hit the tap grid every `num` taps (den symbols)
        sym = rc[center % num :: num]
        main = np.max(np.abs(sym))
        others = np.abs(sym[np.abs(sym) < main])
        isi_db = 20 * np.log10(np.max(others) / main)
        assert isi_db < -40.0


class TestOverlapSave:
    def test_identity_kernel(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(2000) + 1j * rng.standard_normal(2000)
        cfg = OverlapSaveConfig(256, 64)
        y = overlap_save(x, cfg, np.ones(256, dtype=complex))
        np.testing.assert_allclose(y, x, atol=1e-10)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(3000) + 1j * rng.standard_normal(3000)
        taps = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        cfg = OverlapSaveConfig(256, 64)
        y = overlap_save(x, cfg, fd_kernel_from_taps(taps, 256))
        ref = direct_fir(x, taps)
        assert rms(y - ref) < RMS_TOL * 10

    def test_hundred_random_kernel_signal_pairs(self):
        rng = np.random.default_rng(7)
        for trial in range(100):
            n, ov = [(252, 54), (250, 50), (256, 64)][trial % 3]
            klen = int(rng.integers(1, ov + 2))
            x = rng.standard_normal(1200) + 1j * rng.standard_normal(1200)
            taps = rng.standard_normal(klen) + 1j * rng.standard_normal(klen)
            cfg = OverlapSaveConfig(n, ov)
            y = overlap_save(x, cfg, fd_kernel_from_taps(taps, n))
            ref = direct_fir(x, taps)
            assert rms(y - ref) < RMS_TOL * 100

    def test_block_advance_counts(self):
        cfg = OverlapSaveConfig(252, 54)
        assert cfg.hop == 198
        assert cfg.overlap_rate == Fraction(252, 198)

    def test_kernel_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            overlap_save(np.ones(500, complex), OverlapSaveConfig(256, 64), np.ones(128))

    @pytest.mark.parametrize("n,ov", [(252, 54), (250, 50), (256, 64)])
    def test_paper_profiles_overlap_rate(self, n, ov):
        cfg = OverlapSaveConfig(n, ov)
        assert cfg.overlap_rate == Fraction(n, n - ov)
        assert cfg.overlap_rate > 1


class TestResample:
    def test_unity_ratio_is_identity(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
        np.testing.assert_array_equal(resample_rational(x, 3, 3), x)

    def test_length_contract(self):
        x = np.zeros(1000, dtype=complex)
        assert len(resample_rational(x, 5, 4)) == 1250
        assert len(resample_rational(x, 9, 32)) == 281
        assert len(resample_rational(x, 1, 2)) == 500

    def test_tone_preserved_downsampling_9_to_8(self):
        n = 8192
        f0 = 0.1  # of input rate
        x = np.exp(2j * np.pi * f0 * np.arange(n))
        y = resample_rational(x, 8, 9)
        guard = 500
        f_meas, _ = tone_peak(y[guard:-guard], fs=8 / 9)
        assert abs(f_meas - f0) < 1e-4
        p_in = np.mean(np.abs(x) ** 2)
        p_out = np.mean(np.abs(y[guard:-guard]) ** 2)
        assert abs(10 * np.log10(p_out / p_in)) < 0.1

    def test_tone_preserved_upsampling(self):
        n = 4096
        f0 = 0.08
        x = np.exp(2j * np.pi * f0 * np.arange(n))
        y = resample_rational(x, 4, 1)
        guard = 400
        f_meas, _ = tone_peak(y[guard:-guard], fs=4.0)
        assert abs(f_meas - f0) < 1e-4
        p_out = np.mean(np.abs(y[guard:-guard]) ** 2)
        assert abs(10 * np.log10(p_out)) < 0.1

    def test_zero_factor_rejected(self):
        with pytest.raises(ValueError):
            resample_rational(np.ones(10, complex), 0, 2)
        with pytest.raises(ValueError):
            resample_rational(np.ones(10, complex), 2, 0)

    def test_rate_bookkeeping(self):
        x = ComplexBuf(np.zeros(100, complex), Fraction(1))
        y = resample_rational(x, 9, 8)
        assert y.rate_sps == Fraction(9, 8)


class TestLagrange:
    def test_zero_delay_is_impulse(self):
        w = lagrange_weights(0.0, 14)
        expected = np.zeros(29)
        expected[14] = 1.0
        np.testing.assert_allclose(w, expected, atol=1e-12)

    def test_weights_sum_to_one(self):
        for mu in np.linspace(0, 1, 9):
            for L in (1, 7, 14):
                assert abs(np.sum(lagrange_weights(mu, L)) - 1.0) < 1e-9

    def test_fractional_delay_tone(self):
        n = 4096
        f0 = 0.15
        x = np.exp(2j * np.pi * f0 * np.arange(n))
        for delay in (0.3, 1.7, -0.4):
            y = fractional_delay(x, delay, half_len=8)
            ref = ideal_fractional_delay(x, delay)
            err = rms((y - ref)[100:-100]) / rms(x)
            # 17-tap Lagrange at 0.3 Nyquist: approximation error ~1e-3
            assert err < 2e-3
