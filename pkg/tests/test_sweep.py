import math
from dataclasses import replace

import numpy as np
import pytest

from ringlink import (
    AxisSpec,
    BiasPoint,
    InfeasibleError,
    LinkParams,
    ModulatorSpec,
    Objective,
    OptimizeConstraints,
    SweepSpec,
    avg_photocurrent,
    link_gain,
    null_bias_analysis,
    optimize_bias,
    run_sweep,
)

P_13_DBM = 10 ** (13 / 10) * 1e-3
QUAD = BiasPoint(math.pi / 2, math.pi, 0.5)


def table_link(**kw):
    return LinkParams(p_laser=P_13_DBM, **kw)


def table_mod():
    return ModulatorSpec(v_pi=5.0, insertion_loss=10.0, electrode_r=5.0,
                         electrode_c=200e-15)


def bias_plane_spec(count=41, metrics=("Gain", "NF", "SFDR")):
    return SweepSpec(
        axis1=AxisSpec("theta_dc", 0.0, 2 * math.pi, count),
        axis2=AxisSpec("tau", 0.05, 0.95, count),
        bias=QUAD,
        modulator=table_mod(),
        link=table_link(),
        metrics=metrics,
    )


class TestAxisSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            AxisSpec("bogus", 0, 1, 5)
        with pytest.raises(ValueError):
            AxisSpec("tau", 0.5, 0.1, 5)
        with pytest.raises(ValueError):
            AxisSpec("tau", 0.1, 0.5, 1)


class TestRunSweep:
    def test_shapes(self):
        grid = run_sweep(bias_plane_spec(count=11))
        for m in ("Gain", "NF", "SFDR"):
            assert grid.data[m].shape == (11, 11)

    def test_determinism(self):
        a = run_sweep(bias_plane_spec(count=15))
        b = run_sweep(bias_plane_spec(count=15))
        for m in a.data:
            assert np.array_equal(a.data[m], b.data[m], equal_nan=True)

    def test_gain_peaks_at_theta_dc_zero_edge(self):
        grid = run_sweep(bias_plane_spec(count=41, metrics=("Gain",)))
        i, j = np.unravel_index(np.argmax(grid.data["Gain"]), grid.data["Gain"].shape)
        # ring resonance (theta_DC = 0 or the 2pi wrap) maximizes gamma1
        assert grid.axis1_values[i] in (grid.axis1_values[0], grid.axis1_values[-1])

    def test_nf_minimized_at_theta_dc_zero_edge(self):
        # large gain lowers the noise figure, so NF is best where gain peaks;
        # computed surface settles the extremum direction at resonance
        grid = run_sweep(bias_plane_spec(count=41, metrics=("NF",)))
        nf = grid.data["NF"]
        i, j = np.unravel_index(np.argmin(nf), nf.shape)
        assert grid.axis1_values[i] in (grid.axis1_values[0], grid.axis1_values[-1])
        assert np.all(nf >= nf[i, j])

    def test_sfdr_argmax_at_linearized_point_101(self):
        grid = run_sweep(bias_plane_spec(count=101, metrics=("SFDR",)))
        sfdr = grid.data["SFDR"]
        i, j = np.unravel_index(np.argmax(sfdr), sfdr.shape)
        assert grid.axis1_values[i] == pytest.approx(math.pi, abs=1e-12)
        assert grid.axis2_values[j] == pytest.approx(0.5, abs=1e-12)
        # the maximum is the flagged third-order null
        assert math.isinf(sfdr[i, j])
        assert np.count_nonzero(np.isinf(sfdr) & (sfdr > 0)) == 1

    def test_argmax_invariant_under_db_or_linear(self):
        grid = run_sweep(bias_plane_spec(count=31, metrics=("SFDR",)))
        sfdr_db = grid.data["SFDR"]
        linear = 10 ** (sfdr_db / 10.0)
        assert np.argmax(sfdr_db) == np.argmax(linear)

    def test_flags_on_zero_gain_cells(self):
        spec = SweepSpec(
            axis1=AxisSpec("phi_bias", 0.0, math.pi, 9),
            axis2=None,
            bias=QUAD,
            modulator=table_mod(),
            link=table_link(),
            metrics=("Gain", "NF"),
        )
        grid = run_sweep(spec)
        # phi_bias = 0 and pi have no small-signal gain
        assert math.isinf(grid.data["Gain"][0, 0])
        assert grid.data["Gain"][0, 0] < 0
        assert any(i == 0 for i, _, _ in grid.flags["Gain"])
        assert math.isinf(grid.data["NF"][0, 0])
        # float sin(pi) leaves a vanishing but nonzero gain at phi = pi,
        # so that end shows a huge finite NF rather than the exact infinity
        assert grid.data["NF"][-1, 0] > 300.0

    def test_1d_sweep(self):
        spec = SweepSpec(
            axis1=AxisSpec("p_laser", 1e-3, 1e-1, 21),
            axis2=None,
            bias=QUAD,
            modulator=table_mod(),
            link=table_link(),
            metrics=("Gain", "Photocurrent"),
        )
        grid = run_sweep(spec)
        assert grid.data["Gain"].shape == (21, 1)
        # gain in dB rises by 20 dB per decade of laser power
        g = grid.data["Gain"][:, 0]
        assert g[-1] - g[0] == pytest.approx(40.0, abs=1e-9)


class TestOptimizeBias:
    def test_max_sfdr_unconstrained_finds_linearized_point(self):
        bias, metrics = optimize_bias(Objective.MAX_SFDR, table_mod(), table_link())
        assert bias.phi_bias == pytest.approx(math.pi / 2, abs=1e-9)
        assert bias.theta_dc == pytest.approx(math.pi, abs=1e-9)
        assert bias.tau == pytest.approx(0.5, abs=1e-9)
        assert metrics.sfdr_db == pytest.approx(128.0, abs=0.5)

    def test_max_gain_hits_resonance_boundary(self):
        bias, _ = optimize_bias(
            Objective.MAX_GAIN, table_mod(), table_link(),
            bounds={"phi_bias": (math.pi / 2, math.pi / 2)})
        near_zero = min(bias.theta_dc, abs(2 * math.pi - bias.theta_dc))
        assert near_zero == pytest.approx(0.0, abs=1e-9)
        assert bias.tau == pytest.approx(0.95, abs=1e-9)

    def test_max_sfdr_with_min_gain_excludes_linearized(self):
        g_lin = link_gain(QUAD, table_mod(), table_link())
        bias, metrics = optimize_bias(
            Objective.MAX_SFDR, table_mod(), table_link(),
            constraints=OptimizeConstraints(min_gain=2.0 * g_lin))
        assert abs(bias.theta_dc - math.pi) > 1e-6
        assert metrics.gain_linear >= 2.0 * g_lin

    def test_deterministic(self):
        a = optimize_bias(Objective.MIN_NF, table_mod(), table_link())
        b = optimize_bias(Objective.MIN_NF, table_mod(), table_link())
        assert a[0] == b[0]

    def test_refinement_not_worse_than_coarse(self):
        cons = OptimizeConstraints(max_photocurrent=2e-3)
        bias, metrics = optimize_bias(Objective.MAX_GAIN, table_mod(), table_link(),
                                      constraints=cons)
        # exhaustive scan on the coarse lattice must not beat the result
        best = 0.0
        for phi in np.linspace(0, math.pi, 17):
            for thdc in np.linspace(0, 2 * math.pi, 33):
                for tau in np.linspace(0.05, 0.95, 19):
                    b = BiasPoint(float(phi), float(thdc), float(tau))
                    if avg_photocurrent(b, table_mod(), table_link()) > 2e-3:
                        continue
                    best = max(best, link_gain(b, table_mod(), table_link()))
        assert metrics.gain_linear >= best - 1e-15

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            optimize_bias(Objective.MAX_GAIN, table_mod(), table_link(),
                          constraints=OptimizeConstraints(max_nf_db=-1.0))


class TestNullBias:
    def test_gain_advantage_over_6db(self):
        res = null_bias_analysis(
            table_link(), table_mod(), QUAD,
            p_laser_range=(10 ** 2.5 * 1e-3, 1.0), counts=(11, 11))
        # endpoints of the laser-power axis are 25 and 30 dBm
        assert res.gain_iso_db[-1] - res.gain_iso_db[0] > 6.0

    def test_iso_curve_holds_current(self):
        res = null_bias_analysis(
            table_link(), table_mod(), QUAD,
            p_laser_range=(10 ** 2.5 * 1e-3, 1.0), counts=(5, 9))
        for p, phi in zip(res.p_laser, res.phi_iso):
            if math.isnan(phi):
                continue
            link = replace(table_link(), p_laser=float(p))
            got = avg_photocurrent(BiasPoint(phi, math.pi, 0.5), table_mod(), link)
            assert abs(got - res.target_current) < 1e-12

    def test_zero_target_forces_null(self):
        res = null_bias_analysis(
            table_link(), table_mod(), QUAD,
            p_laser_range=(0.1, 1.0), counts=(5, 7), target_current=0.0)
        assert np.allclose(res.phi_iso, math.pi)

    def test_unreachable_targets_flagged(self):
        res = null_bias_analysis(
            table_link(), table_mod(), QUAD,
            p_laser_range=(1e-3, 1e-2), counts=(5, 7))  # far below 15.5 mA
        assert len(res.no_solution) == 7
        assert np.all(np.isnan(res.phi_iso))
