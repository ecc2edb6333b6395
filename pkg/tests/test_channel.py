"""Channel taps, LED model, propagation, and photon statistics."""

import math

import numpy as np
import pytest

from eppm.channel import (
    BadGeometry,
    C_LIGHT,
    ChannelTaps,
    ModeMismatch,
    PLANCK,
    PhotonModel,
    build_taps,
    illuminance_to_power,
    led_response_taps,
    propagate,
    sample_counts,
)
from eppm.codes import catalog_codebook


def photon(lambda0=1.0, lambda_b=0.0, chip_time=1e-9):
    e = PLANCK * C_LIGHT / 650e-9
    p0 = lambda0 * e / (0.7 * chip_time)
    return PhotonModel(
        lambda0=lambda0,
        lambda_b=lambda_b,
        eta=0.7,
        peak_power=p0,
        wavelength=650e-9,
        chip_time=chip_time,
    )


class TestBuildTaps:
    def test_ideal_channel(self):
        taps = build_taps(sigma=0.0, tau=0.0, e_los=1.0, e_nlos=0.0, chip_time=1e-9, q=7)
        assert np.array_equal(taps.h, [1.0])

    def test_half_half_narrow_gaussian(self):
        tc = 1e-9
        taps = build_taps(
            sigma=tc / 100, tau=2 * tc, e_los=1.0, e_nlos=1.0, chip_time=tc, q=7
        )
        np.testing.assert_allclose(taps.h[:3], [0.5, 0.0, 0.5], atol=1e-9)
        assert taps.h[3:].sum() < 1e-9

    def test_fig6_style_los_fraction(self):
        taps = build_taps(
            sigma=1e-9, tau=3e-9, e_los=5e-16, e_nlos=5e-16, chip_time=1.4e-9, q=11
        )
        # tap 0 may pick up a little diffuse leakage but carries the 0.5 LOS share
        assert taps.h[0] >= 0.5
        assert taps.h[0] == pytest.approx(0.5, abs=0.02)

    def test_energy_conserved(self):
        for sigma, tau, el, en, q in [
            (0.5e-9, 2e-9, 1.0, 1.0, 11),
            (5e-9, 2e-9, 1.0, 3.0, 19),
            (2e-9, 0.0, 0.0, 1.0, 11),
            (0.0, 0.0, 1.0, 0.0, 7),
        ]:
            for mode in ("cyclic", "linear"):
                taps = build_taps(sigma, tau, el, en, 1e-9, q, mode=mode)
                assert taps.h.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.all(taps.h >= 0)

    def test_blocked_los_centered(self):
        taps = build_taps(sigma=2e-9, tau=0.0, e_los=0.0, e_nlos=1.0, chip_time=1e-9, q=11)
        # peak at tap 0, symmetric mass wraps to the top indices
        assert np.argmax(taps.h) == 0
        np.testing.assert_allclose(taps.h[1:5], taps.h[-1:-5:-1], rtol=1e-9)

    def test_bad_geometry(self):
        with pytest.raises(BadGeometry):
            build_taps(sigma=1e-9, tau=0.5e-9, e_los=1.0, e_nlos=1.0, chip_time=1e-9, q=7)

    def test_gaussian_mass_oracle(self):
        # closed form: mass in bin ell is Phi((edges - tau)/sigma) difference
        from scipy.special import ndtr

        tc, sigma, tau = 1e-9, 1.5e-9, 8e-9  # +-4 sigma stays at positive delay
        taps = build_taps(sigma, tau, 0.0, 1.0, tc, q=64, mode="linear")
        lo, hi = tau - 4 * sigma, tau + 4 * sigma
        for ell in (5, 6, 7, 8, 9, 10, 11):
            a = max((ell - 0.5) * tc, lo)
            b = min((ell + 0.5) * tc, hi)
            expected = (ndtr((b - tau) / sigma) - ndtr((a - tau) / sigma)) / (
                ndtr(4.0) - ndtr(-4.0)
            )
            assert taps.h[ell] == pytest.approx(expected, rel=1e-9)


class TestLedResponse:
    def test_unit_sum(self):
        taps = led_response_taps(20e-9, 2e-9)
        assert taps.sum() == pytest.approx(1.0, abs=1e-9)

    def test_causal_delayed_peak(self):
        taps = led_response_taps(20e-9, 1e-9)
        assert np.argmax(taps) > 0

    def test_subchip_response(self):
        taps = led_response_taps(20e-9, 40e-9)
        assert len(taps) == 1
        assert taps[0] == pytest.approx(1.0)

    def test_time_scaling_invariance(self):
        # t_led only sets the time scale: doubling both t_led and the chip
        # time reproduces the same taps
        a = led_response_taps(20e-9, 0.5e-9)
        b = led_response_taps(40e-9, 1.0e-9)
        np.testing.assert_allclose(a, b, rtol=1e-9)

    def test_energy_within_t_led(self):
        tc = 0.25e-9
        taps = led_response_taps(20e-9, tc)
        n_inside = int(20e-9 / tc)
        assert taps[:n_inside].sum() > 0.98

    def test_peak_location_scales_with_t_led(self):
        tc = 0.25e-9
        taps = led_response_taps(20e-9, tc)
        # order-6 prototype peaks at ~42% of its decay-to-1% duration
        assert np.argmax(taps) * tc == pytest.approx(0.42 * 20e-9, rel=0.15)

    def test_nonnegative(self):
        assert np.all(led_response_taps(20e-9, 0.5e-9) >= 0)


class TestPropagate:
    def test_identity_channel(self):
        cb = catalog_codebook(7, 3, 1)
        taps = ChannelTaps(h=np.array([1.0]), chip_time=1e-9, mode="cyclic", q=7)
        ph = photon(lambda0=10.0)
        out = propagate(cb.rows[0].astype(float), taps, ph)
        np.testing.assert_allclose(out, 10.0 * cb.rows[0])

    def test_single_delayed_tap_shifts_codeword(self):
        cb = catalog_codebook(7, 3, 1)
        taps = ChannelTaps(h=np.array([0.0, 1.0]), chip_time=1e-9, mode="cyclic", q=7)
        ph = photon(lambda0=3.0)
        out = propagate(cb.rows[0].astype(float), taps, ph)
        np.testing.assert_allclose(out, 3.0 * cb.rows[1])

    def test_background_only(self):
        taps = ChannelTaps(h=np.array([1.0]), chip_time=1e-9, mode="cyclic", q=5)
        ph = photon(lambda0=4.0, lambda_b=2.5)
        out = propagate(np.zeros(5), taps, ph)
        np.testing.assert_allclose(out, 2.5)

    def test_cyclic_formula_symbolic(self):
        # mean = lambda0 * sum_l h_l c_{m+l} + lambda_b, exactly
        cb = catalog_codebook(11, 5, 2)
        h = np.array([0.5, 0.3, 0.0, 0.2])
        taps = ChannelTaps(h=h, chip_time=1e-9, mode="cyclic", q=11)
        ph = photon(lambda0=7.0, lambda_b=1.0)
        m = 4
        expected = 1.0 + 7.0 * sum(h[l] * cb.rows[(m + l) % 11] for l in range(4))
        np.testing.assert_allclose(propagate(cb.rows[m].astype(float), taps, ph), expected)

    def test_linear_matches_cyclic_for_delta(self):
        frame = np.array([1.0, 0, 1, 1, 0])
        ph = photon(lambda0=2.0, lambda_b=0.5)
        cyc = propagate(frame, ChannelTaps(np.array([1.0]), 1e-9, "cyclic", q=5), ph)
        lin = propagate(frame, ChannelTaps(np.array([1.0]), 1e-9, "linear"), ph)
        np.testing.assert_allclose(lin, cyc)

    def test_mode_mismatch_for_oeppm_length(self):
        taps = ChannelTaps(h=np.array([1.0]), chip_time=1e-9, mode="cyclic", q=7)
        with pytest.raises(ModeMismatch):
            propagate(np.zeros(9), taps, photon())

    def test_wrap_beyond_q(self):
        # tap at delay q+1 wraps onto delay 1
        frame = np.array([1.0, 0, 0, 0, 0])
        ph = photon(lambda0=1.0)
        taps = ChannelTaps(h=np.concatenate([[0.5], np.zeros(5), [0.5]]), chip_time=1e-9,
                           mode="cyclic", q=5)
        out = propagate(frame, taps, ph)
        np.testing.assert_allclose(out, [0.5, 0.5, 0, 0, 0])


class TestSampleCounts:
    def test_zero_mean_is_zero(self):
        rng = np.random.default_rng(0)
        assert np.all(sample_counts(np.zeros(100), rng) == 0)

    def test_poisson_moments(self):
        rng = np.random.default_rng(42)
        draws = sample_counts(np.full(10**6, 100.0), rng)
        # 5-sigma bands: se(mean) = 10/1000, se(var) ~ sqrt(2*100^2/n) ~ 0.45
        assert abs(draws.mean() - 100.0) < 0.5
        assert abs(draws.var() - 100.0) < 1.5

    def test_reproducible(self):
        a = sample_counts(np.arange(50, dtype=float), np.random.default_rng(7))
        b = sample_counts(np.arange(50, dtype=float), np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_negative_mean_rejected(self):
        with pytest.raises(ValueError):
            sample_counts(np.array([-1.0]), np.random.default_rng(0))


class TestPhotonModel:
    def test_lambda0_consistency_enforced(self):
        with pytest.raises(ValueError):
            PhotonModel(
                lambda0=5.0, lambda_b=0.0, eta=0.7, peak_power=1e-6,
                wavelength=650e-9, chip_time=1e-9,
            )

    def test_from_peak_power(self):
        ph = PhotonModel.from_peak_power(0.7, 40e-6, 650e-9, 1e-9, background_power=1e-7)
        e = PLANCK * C_LIGHT / 650e-9
        assert ph.lambda0 == pytest.approx(0.7 * 40e-6 * 1e-9 / e)
        assert ph.lambda_b == pytest.approx(0.7 * 1e-7 * 1e-9 / e)

    def test_from_bit_energy_totals(self):
        # K unit pulses carry b * E_bit of energy: lambda0 * K = eta*b*E/hv
        ph = PhotonModel.from_bit_energy(
            eta=0.7, energy_per_bit=1e-15, bits_per_symbol=3, code_weight=5,
            wavelength=650e-9, chip_time=1.36e-9,
        )
        e = PLANCK * C_LIGHT / 650e-9
        assert ph.lambda0 * 5 == pytest.approx(0.7 * 3 * 1e-15 / e)


class TestIlluminance:
    def test_standard_office(self):
        assert illuminance_to_power(400, 1.0) == pytest.approx(4e-5)

    def test_zero(self):
        assert illuminance_to_power(0, 1.0) == 0.0

    def test_linear_scaling(self):
        assert illuminance_to_power(320, 0.1) == pytest.approx(3.2e-6)
