import math

import numpy as np
import pytest

from ringlink import (
    AliasError,
    BiasPoint,
    DriveTopology,
    LinkParams,
    ModulatorSpec,
    NotInSmallSignalError,
    ToneExtraction,
    ToneStimulus,
    finite_diff_coeffs,
    fit_intercept,
    iip3,
    intercept_from_sweep,
    taylor_coefficients,
    two_tone_simulate,
)
from ringlink.errors import StepTooSmallError
from ringlink.oracle import tone_power_w

P_13_DBM = 10 ** (13 / 10) * 1e-3
QUAD = BiasPoint(math.pi / 2, math.pi, 0.5)
GE = BiasPoint(math.pi / 2, 0.0, 0.5)


def table_link():
    return LinkParams(p_laser=P_13_DBM)


def table_mod(drive=DriveTopology.RAMZM_MATCHED):
    return ModulatorSpec(v_pi=5.0, insertion_loss=10.0, electrode_r=5.0,
                         electrode_c=200e-15, drive=drive)


def random_safe_bias(rng):
    """Valid lossless bias away from coefficient zeros."""
    while True:
        b = BiasPoint(rng.uniform(0.3, 2.8), rng.uniform(0.4, 5.9),
                      rng.uniform(0.1, 0.8))
        g = taylor_coefficients(b)
        if min(abs(x) for x in g.as_tuple()) >= 0.02:
            return b


class TestFiniteDiffCoeffs:
    def test_null_gamma3(self):
        fd = finite_diff_coeffs(QUAD)
        assert abs(fd.gamma3) < 1e-8

    def test_ge_gamma1(self):
        fd = finite_diff_coeffs(GE)
        assert fd.gamma1 == pytest.approx(3.0, rel=1e-6)

    def test_matches_closed_forms_100_random(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            b = random_safe_bias(rng)
            fd = finite_diff_coeffs(b)
            cf = taylor_coefficients(b)
            for got, want in zip(fd.as_tuple(), cf.as_tuple()):
                assert got == pytest.approx(want, rel=1e-6)

    def test_lossy_regression_golden(self):
        # no closed form exists here; frozen from this oracle
        b = BiasPoint(math.pi / 2, 2.0, 0.7, alpha=0.97)
        fd = finite_diff_coeffs(b)
        assert fd.gamma0 == pytest.approx(0.985124138773443, rel=1e-9)
        assert fd.gamma1 == pytest.approx(0.24229020617334673, rel=1e-9)
        assert fd.gamma3 == pytest.approx(-0.03010683874671566, rel=1e-8)

    def test_step_bounds(self):
        with pytest.raises(ValueError):
            finite_diff_coeffs(QUAD, h=0.1)
        with pytest.raises(ValueError):
            finite_diff_coeffs(QUAD, h=1e-5)


class TestTwoToneSimulate:
    def test_extraction_leakage_free(self):
        # a pure sinusoid projected on non-signal bins stays at rounding level
        n = 256
        j = np.arange(n)
        x = np.sin(2 * np.pi * 9 * j / n)
        for b in (7, 8, 10, 11, 19, 28):
            c = 2 / n * np.sum(x * np.cos(2 * np.pi * b * j / n))
            s = 2 / n * np.sum(x * np.sin(2 * np.pi * b * j / n))
            assert np.hypot(c, s) < 1e-13

    def test_null_bias_im3_below_1e10(self):
        stim = ToneStimulus(1e-3 * 5.0 / math.pi, 0.9e9, 1.0e9, 5.0)
        ext = two_tone_simulate(stim, QUAD, table_mod(), table_link())
        fund = ext.amplitude(1)
        im3_bin = ext.amps[ext.freqs.index(abs(2 * 0.9e9 - 1.0e9))]
        assert im3_bin / fund < 1e-10

    def test_im3_bin_orders(self):
        stim = ToneStimulus(0.02, 0.9e9, 1.0e9, 5.0)
        at_null = two_tone_simulate(stim, QUAD, table_mod(), table_link())
        off_null = two_tone_simulate(stim, GE, table_mod(), table_link())
        idx = at_null.freqs.index(abs(2 * 0.9e9 - 1.0e9))
        assert at_null.orders[idx] == 5
        assert off_null.orders[idx] == 3

    def test_im3_slope_is_cubic(self):
        amps, p_in = [], []
        for v in np.geomspace(0.003, 0.03, 6):
            stim = ToneStimulus(v, 0.9e9, 1.0e9, 5.0)
            ext = two_tone_simulate(stim, QUAD, table_mod(DriveTopology.MZM_SINGLE),
                                    table_link())
            amps.append(ext.amplitude(3))
            p_in.append(stim.p_in(50.0))
        slope = np.polyfit(np.log10(p_in),
                           np.log10([tone_power_w(a, 50.0) for a in amps]), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.01)

    def test_order_slope_laws(self):
        # orders 2, 3, 5 extracted from one off-symmetry bias
        b = BiasPoint(1.1, 2.2, 0.45)
        recs = {2: [], 3: [], 5: []}
        p_in = []
        for v in np.geomspace(0.02, 0.09, 6):
            stim = ToneStimulus(v, 0.9e9, 1.0e9, 5.0)
            ext = two_tone_simulate(stim, b, table_mod(), table_link())
            p_in.append(stim.p_in(50.0))
            for order in recs:
                recs[order].append(tone_power_w(ext.amplitude(order), 50.0))
        for order, powers in recs.items():
            slope = np.polyfit(np.log10(p_in), np.log10(powers), 1)[0]
            assert slope == pytest.approx(order, rel=0.005)

    def test_even_null_robust_lossless_only(self):
        # exact IM2 suppression at quadrature holds for lossless rings at
        # any (theta_dc, tau); loss reintroduces a real even-order term
        rng = np.random.default_rng(37)
        stim = ToneStimulus(0.01, 0.9e9, 1.0e9, 5.0)
        for _ in range(20):
            b = BiasPoint(math.pi / 2, rng.uniform(0, 2 * math.pi),
                          rng.uniform(0.05, 0.9))
            ext = two_tone_simulate(stim, b, table_mod(), table_link())
            assert ext.amplitude(2) / ext.amplitude(1) < 1e-10
        lossy = BiasPoint(math.pi / 2, math.pi, 0.5, alpha=0.9)
        ext = two_tone_simulate(stim, lossy, table_mod(), table_link())
        assert ext.amplitude(2) / ext.amplitude(1) > 1e-8

    def test_alias_guard(self):
        stim = ToneStimulus(0.01, 0.9e9, 1.0e9, 5.0)
        with pytest.raises(AliasError):
            two_tone_simulate(stim, QUAD, table_mod(), table_link(),
                              samples_per_period=64)

    def test_irrational_ratio_rejected(self):
        stim = ToneStimulus(0.01, 1.0e9, math.pi * 1e9, 5.0)
        with pytest.raises(ValueError):
            two_tone_simulate(stim, QUAD, table_mod(), table_link())


class TestInterceptFromSweep:
    def test_synthetic_power_laws(self):
        # p_fund = a P, p_im3 = b P^3 -> intercept sqrt(a/b)
        a, c = 2.5, 0.03
        p_in = list(np.geomspace(1e-6, 1e-4, 6))
        extractions = []
        for p in p_in:
            amp_f = math.sqrt(8 * a * p / 50.0)       # invert tone_power_w
            amp_3 = math.sqrt(8 * c * p**3 / 50.0)
            extractions.append(ToneExtraction((1e9, 8e8), (amp_f, amp_3), (1, 3)))
        got = intercept_from_sweep(extractions, p_in, 3, r_load=50.0)
        assert got == pytest.approx(math.sqrt(a / c), rel=1e-10)

    def test_requires_enough_points(self):
        with pytest.raises(ValueError):
            intercept_from_sweep([], [], 3)

    def test_bad_slope_raises(self):
        p_in = list(np.geomspace(1e-6, 1e-4, 5))
        extractions = [ToneExtraction((1e9, 8e8), (1.0, p**2), (1, 3)) for p in p_in]
        with pytest.raises(NotInSmallSignalError):
            intercept_from_sweep(extractions, p_in, 3)


class TestFitIntercept:
    def test_mzm_quadrature_iip3(self):
        mod = table_mod(DriveTopology.MZM_SINGLE)
        fitted = fit_intercept(QUAD, mod, table_link(), order=3)
        analytic = 4 * 25.0 / (math.pi**2 * 50.0)
        assert 10 * abs(math.log10(fitted / analytic)) < 0.1

    def test_ge_iip3_matches_hand_value(self):
        fitted = fit_intercept(GE, table_mod(), table_link(), order=3)
        assert 10 * math.log10(fitted / 1e-3) == pytest.approx(7.047, abs=0.1)

    def test_linearized_iip5_golden(self):
        fitted = fit_intercept(QUAD, table_mod(), table_link(), order=5)
        assert 10 * math.log10(fitted / 1e-3) == pytest.approx(21.88, abs=0.1)
