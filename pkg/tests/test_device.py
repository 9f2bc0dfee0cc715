import cmath
import math

import numpy as np
import pytest

from ringlink import (
    AlphaNotUnityError,
    BiasPoint,
    DriveTopology,
    mzm_transmission,
    output_field,
    quintic_coefficient,
    ring_phase,
    ring_response,
    taylor_coefficients,
    transmission,
)
from ringlink.device import mzm_taylor_coefficients


def bias(phi=math.pi / 2, thdc=math.pi, tau=0.5, alpha=1.0, psi=0.0):
    return BiasPoint(phi_bias=phi, theta_dc=thdc, tau=tau, alpha=alpha, psi_path=psi)


LINEARIZED = bias()
GAIN_ENHANCED = bias(thdc=0.0)


class TestBiasPoint:
    def test_validation(self):
        with pytest.raises(ValueError):
            BiasPoint(0.0, 0.0, tau=1.0)
        with pytest.raises(ValueError):
            BiasPoint(0.0, 0.0, tau=0.5, alpha=0.0)
        with pytest.raises(ValueError):
            BiasPoint(math.nan, 0.0, tau=0.5)

    def test_kappa(self):
        b = bias(tau=0.6)
        assert abs(b.kappa**2 + b.tau**2 - 1.0) < 1e-15


class TestRingResponse:
    def test_at_zero(self):
        # (tau - 1)/(1 - tau) = -1
        assert abs(ring_response(0.0, LINEARIZED) - (-1.0)) < 1e-15

    def test_at_pi(self):
        # (tau + 1)/(1 + tau) = +1
        assert abs(ring_response(math.pi, LINEARIZED) - 1.0) < 1e-15

    def test_lossy_hand_value(self):
        # independent complex-arithmetic evaluation at theta=pi/2, tau=.5, a=.95
        z = 0.95 * cmath.exp(-1j * math.pi / 2)
        expected = (0.5 - z) / (1 - 0.5 * z)
        got = ring_response(math.pi / 2, bias(tau=0.5, alpha=0.95))
        assert abs(got - expected) < 1e-15

    def test_all_pass_magnitude(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            b = bias(tau=rng.uniform(0.0, 0.99))
            theta = rng.uniform(-10, 10)
            assert abs(abs(ring_response(theta, b)) - 1.0) < 1e-12


class TestRingPhase:
    def test_at_pi(self):
        assert abs(ring_phase(math.pi, LINEARIZED)) < 1e-15

    def test_branch_at_zero(self):
        # naive arctan would return 0 here; the true phase is pi
        assert abs(ring_phase(0.0, LINEARIZED) - math.pi) < 1e-15

    def test_matches_complex_argument(self):
        b = bias(tau=0.7)
        got = ring_phase(2.0, b)
        assert abs(got - cmath.phase(ring_response(2.0, b))) < 1e-12

    def test_matches_argument_lossy(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            b = bias(tau=rng.uniform(0.05, 0.95), alpha=rng.uniform(0.8, 1.0))
            theta = rng.uniform(0.0, 2 * math.pi)
            assert abs(ring_phase(theta, b) - cmath.phase(ring_response(theta, b))) < 1e-12


class TestOutputField:
    def test_constructive(self):
        b = bias(phi=0.0)
        assert abs(abs(output_field(0.0, b)) - 1.0) < 1e-15

    def test_destructive(self):
        b = bias(phi=math.pi)
        assert abs(output_field(0.0, b)) < 1e-15

    def test_matches_transmission_lossy(self):
        b = bias(alpha=0.98)
        t = transmission(0.1, b)
        assert abs(abs(output_field(0.1, b)) ** 2 - t) < 1e-15

    def test_scales_with_input(self):
        b = bias(alpha=0.93, psi=0.2)
        e = output_field(0.05, b, e_in=2.0 + 1.0j)
        assert abs(e - (2.0 + 1.0j) * output_field(0.05, b)) < 1e-15


class TestTransmission:
    def test_quadrature_midpoint(self):
        assert abs(transmission(0.0, LINEARIZED) - 0.5) < 1e-15

    def test_full_transmission(self):
        assert abs(transmission(0.0, bias(phi=0.0)) - 1.0) < 1e-15

    def test_bounded(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            b = bias(phi=rng.uniform(0, 2 * math.pi), thdc=rng.uniform(0, 2 * math.pi),
                     tau=rng.uniform(0, 0.95), alpha=rng.uniform(0.5, 1.0))
            t = transmission(rng.uniform(-1, 1), b)
            assert -1e-12 <= t <= 1.0 + 1e-12

    def test_antisymmetry_at_quadrature(self):
        # T(th) + T(-th) = 1: the structural even-order null (lossless)
        rng = np.random.default_rng(9)
        for _ in range(300):
            b = bias(thdc=rng.uniform(0, 2 * math.pi), tau=rng.uniform(0, 0.95))
            th = rng.uniform(-2, 2)
            assert abs(transmission(th, b) + transmission(-th, b) - 1.0) < 1e-12

    def test_lossy_even_part_is_magnitude_average(self):
        # with loss the cross term still cancels at quadrature: the even
        # part reduces to the mean of the two ring magnitude responses
        rng = np.random.default_rng(13)
        for _ in range(200):
            b = bias(thdc=rng.uniform(0, 2 * math.pi), tau=rng.uniform(0, 0.9),
                     alpha=rng.uniform(0.7, 0.999))
            th = rng.uniform(-2, 2)
            s = transmission(th, b) + transmission(-th, b)
            mags = (abs(ring_response(b.theta_dc - th, b)) ** 2
                    + abs(ring_response(b.theta_dc + th, b)) ** 2) / 2.0
            assert abs(s - mags) < 1e-12


class TestMzmTransmission:
    def test_quadrature(self):
        assert abs(mzm_transmission(0.0, math.pi / 2, DriveTopology.MZM_SINGLE) - 0.5) < 1e-15

    def test_hand_value(self):
        expected = 0.5 * (1 + math.cos(math.pi / 2 + 0.3))
        got = mzm_transmission(0.3, math.pi / 2, DriveTopology.MZM_SINGLE)
        assert abs(got - expected) < 1e-15

    def test_push_pull_doubles_slope(self):
        h = 1e-6
        def slope(drive):
            up = mzm_transmission(h, math.pi / 2, drive)
            dn = mzm_transmission(-h, math.pi / 2, drive)
            return (up - dn) / (2 * h)
        assert abs(slope(DriveTopology.MZM_PUSH_PULL) / slope(DriveTopology.MZM_SINGLE) - 2.0) < 1e-6

    def test_rejects_ramzm_drive(self):
        with pytest.raises(ValueError):
            mzm_transmission(0.0, 0.0, DriveTopology.RAMZM_MATCHED)


class TestTaylorCoefficients:
    def test_linearized_point(self):
        g = taylor_coefficients(LINEARIZED)
        assert abs(g.gamma1 - 1.0 / 3.0) < 1e-15
        assert abs(g.gamma2) < 1e-15
        assert abs(g.gamma3) < 1e-15
        assert abs(g.gamma4) < 1e-15

    def test_gain_enhanced_point(self):
        g = taylor_coefficients(GAIN_ENHANCED)
        assert abs(g.gamma1 - 3.0) < 1e-12

    def test_quadrature_kills_even_orders(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            b = bias(thdc=rng.uniform(0, 2 * math.pi), tau=rng.uniform(0, 0.9))
            g = taylor_coefficients(b)
            assert abs(g.gamma0 - 1.0) < 1e-12
            assert abs(g.gamma2) < 1e-12
            assert abs(g.gamma4) < 1e-12

    def test_parity_in_phi_bias(self):
        # odd orders follow sin(phi), even orders cos(phi)
        rng = np.random.default_rng(21)
        for _ in range(50):
            thdc, tau = rng.uniform(0, 2 * math.pi), rng.uniform(0.05, 0.9)
            phi = rng.uniform(0.1, math.pi - 0.1)
            g = taylor_coefficients(bias(phi=phi, thdc=thdc, tau=tau))
            ref = taylor_coefficients(bias(phi=math.pi / 2, thdc=thdc, tau=tau))
            s, c = math.sin(phi), math.cos(phi)
            assert abs(g.gamma1 - ref.gamma1 * s) < 1e-12 * max(1, abs(ref.gamma1))
            assert abs(g.gamma3 - ref.gamma3 * s) < 1e-12 * max(1, abs(ref.gamma3))
            ref0 = taylor_coefficients(bias(phi=0.0, thdc=thdc, tau=tau))
            assert abs(g.gamma2 - ref0.gamma2 * c) < 1e-12 * max(1, abs(ref0.gamma2))
            assert abs(g.gamma4 - ref0.gamma4 * c) < 1e-12 * max(1, abs(ref0.gamma4))

    def test_rejects_lossy(self):
        with pytest.raises(AlphaNotUnityError):
            taylor_coefficients(bias(alpha=0.99))

    def test_against_series_of_transmission(self):
        # compare with a dense polynomial fit of the exact transmission
        b = bias(phi=0.9, thdc=2.5, tau=0.6)
        g = taylor_coefficients(b)
        th = np.linspace(-1e-2, 1e-2, 41)
        t_vals = np.array([transmission(x, b) for x in th])
        fit = np.polynomial.polynomial.polyfit(th, t_vals, 6)
        assert abs(fit[0] - g.gamma0 / 2) < 1e-12
        assert abs(fit[1] + g.gamma1) < 1e-9
        assert abs(fit[2] + g.gamma2) < 1e-7
        assert abs(fit[3] - g.gamma3) < 1e-5
        assert abs(fit[4] - g.gamma4) < 1e-3


class TestMzmTaylor:
    def test_quadrature_values(self):
        g = mzm_taylor_coefficients(math.pi / 2, DriveTopology.MZM_SINGLE)
        assert (g.gamma1, g.gamma3) == (0.5, pytest.approx(1 / 12))
        gpp = mzm_taylor_coefficients(math.pi / 2, DriveTopology.MZM_PUSH_PULL)
        assert (gpp.gamma1, gpp.gamma3) == (1.0, pytest.approx(2 / 3))


class TestQuinticCoefficient:
    def test_linearized_value(self):
        # 7/2430: the residual quintic at the third-order null
        assert abs(quintic_coefficient(LINEARIZED) - 7.0 / 2430.0) < 1e-15

    def test_matches_series(self):
        b = bias(phi=0.9, thdc=2.5, tau=0.6)
        th = np.linspace(-2e-2, 2e-2, 81)
        t_vals = np.array([transmission(x, b) for x in th])
        fit = np.polynomial.polynomial.polyfit(th, t_vals, 7)
        assert abs(fit[5] - quintic_coefficient(b)) < 1e-6

    def test_rejects_lossy(self):
        with pytest.raises(AlphaNotUnityError):
            quintic_coefficient(bias(alpha=0.95))


def test_series_truncation_range():
    # the 5th-order series tracks the exact transmission to ~1e-6 for
    # |theta| <= 0.05 at the linearized bias; useful working range note
    g = taylor_coefficients(LINEARIZED)
    t5 = quintic_coefficient(LINEARIZED)
    for th in np.linspace(-0.05, 0.05, 21):
        series = (g.gamma0 / 2 - g.gamma1 * th - g.gamma2 * th**2
                  + g.gamma3 * th**3 + g.gamma4 * th**4 + t5 * th**5)
        assert abs(series - transmission(th, LINEARIZED)) < 1e-6
