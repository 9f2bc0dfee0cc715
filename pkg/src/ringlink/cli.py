"""Command-line front end: report, sweep, two-tone, optimize, null-bias.

Exit codes: 0 success, 2 configuration error, 3 model error (e.g. lossy
rings without --numeric), 4 oracle error (stimulus not in the small-signal
regime). Output files are byte-deterministic for a fixed config and tool
version: floats are written in their shortest round-trip form, infinities
as "inf"/"-inf", and nothing time-dependent is emitted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    load_config,
    parse_config,
    w_to_dbm,
)
from .device import DriveTopology
from .distortion import compute_link_metrics, numeric_link_metrics
from .errors import ConfigError, NotInSmallSignalError, RinglinkError
from .link import LimitingOrder
from .oracle import (
    ToneStimulus,
    intercept_from_sweep,
    tone_power_w,
    two_tone_simulate,
)
from .sweep import (
    METRICS,
    NullBiasResult,
    SweepGrid,
    SweepSpec,
    null_bias_analysis,
    optimize_bias,
    run_sweep,
)

_METRIC_FILES = {
    "Gain": "gain.csv",
    "NF": "nf.csv",
    "SFDR": "sfdr.csv",
    "IIP3": "iip3.csv",
    "IIP2": "iip2.csv",
    "NoisePSD": "noise_psd.csv",
    "Photocurrent": "photocurrent.csv",
}


def _fmt(x: float) -> str:
    """Shortest round-trip decimal; infinities per the file contract."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def _json_safe(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
    return x


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    if getattr(args, "modulator", None):
        try:
            drive = DriveTopology(args.modulator)
        except ValueError:
            raise ConfigError(
                f"--modulator must be one of {[d.value for d in DriveTopology]}") from None
        from dataclasses import replace
        cfg = replace(cfg, modulator=replace(cfg.modulator, drive=drive))
    return cfg


def _metrics_payload(metrics) -> dict:
    return {
        "slope_efficiency_w_per_v": _json_safe(metrics.slope_efficiency),
        "gain_db": _json_safe(metrics.gain_db),
        "nf_db": _json_safe(metrics.nf_db),
        "iip3_dbm": _json_safe(w_to_dbm(metrics.iip3_w) if metrics.iip3_w > 0 else -math.inf),
        "iip2_dbm": _json_safe(w_to_dbm(metrics.iip2_w) if metrics.iip2_w > 0 else -math.inf),
        "sfdr_db": _json_safe(metrics.sfdr_db),
        "sfdr_limiting_order": metrics.limiting_order.name.lower(),
        "avg_photocurrent_a": _json_safe(metrics.avg_photocurrent),
        "noise_out_w_per_hz": _json_safe(metrics.noise_out_w_per_hz),
    }


def cmd_report(args) -> int:
    cfg = _load(args)
    lossy = cfg.modulator.drive.is_ramzm and not cfg.bias.is_lossless
    if lossy and args.numeric:
        metrics = numeric_link_metrics(cfg.bias, cfg.modulator, cfg.link)
    else:
        # lossy without --numeric raises AlphaNotUnityError (exit 3)
        metrics = compute_link_metrics(cfg.bias, cfg.modulator, cfg.link)

    order = {LimitingOrder.SECOND: "2nd", LimitingOrder.THIRD: "3rd",
             LimitingOrder.FIFTH: "5th"}[metrics.limiting_order]
    exp = {LimitingOrder.SECOND: "1/2", LimitingOrder.THIRD: "2/3",
           LimitingOrder.FIFTH: "4/5"}[metrics.limiting_order]
    print(f"drive              : {cfg.modulator.drive.value}")
    print(f"bias (phi, thDC, tau): ({cfg.bias.phi_bias:.6g}, "
          f"{cfg.bias.theta_dc:.6g}, {cfg.bias.tau:.6g}) alpha={cfg.bias.alpha:.6g}")
    print(f"slope efficiency   : {metrics.slope_efficiency:.6g} W/V")
    print(f"link gain          : {metrics.gain_db:.3f} dB")
    print(f"noise figure       : {metrics.nf_db:.3f} dB")
    print(f"IIP2 / IIP3        : {w_to_dbm(metrics.iip2_w):.2f} / "
          f"{w_to_dbm(metrics.iip3_w):.2f} dBm")
    print(f"SFDR               : {metrics.sfdr_db:.2f} dB*Hz^({exp}) ({order}-order limited)")
    print(f"photocurrent       : {metrics.avg_photocurrent * 1e3:.4f} mA")

    payload = {"tool": "ringlink", "version": __version__,
               "metrics": _metrics_payload(metrics)}
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "report.json"), payload)
    return 0


def _write_grid_csv(path: str, grid: SweepGrid, metric: str) -> None:
    data = grid.data[metric]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if grid.axis2_name is not None:
            header = [f"{grid.axis1_name}/{grid.axis2_name}"]
            header += [_fmt(v) for v in grid.axis2_values]
            fh.write(",".join(header) + "\n")
            for i, v1 in enumerate(grid.axis1_values):
                row = [_fmt(v1)] + [_fmt(x) for x in data[i]]
                fh.write(",".join(row) + "\n")
        else:
            fh.write(f"{grid.axis1_name},{metric}\n")
            for i, v1 in enumerate(grid.axis1_values):
                fh.write(f"{_fmt(v1)},{_fmt(data[i, 0])}\n")


def _grid_json(grid: SweepGrid) -> dict:
    out = {
        "axis1": {"param": grid.axis1_name,
                  "values": [_json_safe(float(v)) for v in grid.axis1_values]},
        "metrics": {m: [[_json_safe(float(x)) for x in row] for row in grid.data[m]]
                    for m in sorted(grid.data)},
        "meta": grid.meta,
    }
    if grid.axis2_name is not None:
        out["axis2"] = {"param": grid.axis2_name,
                        "values": [_json_safe(float(v)) for v in grid.axis2_values]}
    return out


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError("sweep section required for the sweep command")
    metrics = cfg.sweep.metrics
    if args.metric:
        metrics = tuple(m.strip() for m in args.metric.split(","))
        for m in metrics:
            if m not in METRICS:
                raise ConfigError(f"--metric: unknown metric {m!r}")
    spec = SweepSpec(axis1=cfg.sweep.axis1, axis2=cfg.sweep.axis2,
                     bias=cfg.bias, modulator=cfg.modulator, link=cfg.link,
                     metrics=metrics)
    grid = run_sweep(spec)
    os.makedirs(args.out, exist_ok=True)
    if args.format == "json":
        _write_json(os.path.join(args.out, "sweep.json"), _grid_json(grid))
        print(f"wrote {os.path.join(args.out, 'sweep.json')}")
    else:
        for m in metrics:
            path = os.path.join(args.out, _METRIC_FILES[m])
            _write_grid_csv(path, grid, m)
            print(f"wrote {path}")
    return 0


def cmd_two_tone(args) -> int:
    cfg = _load(args)
    if cfg.tones is None:
        raise ConfigError("tones section required for the two-tone command")
    tones = cfg.tones
    levels = tones.p_in_levels_w()
    extractions = []
    for p_in in levels:
        v_amp = math.sqrt(2.0 * p_in * cfg.link.r_source)
        stim = ToneStimulus(v_amp, tones.f1, tones.f2, cfg.modulator.v_pi)
        extractions.append(two_tone_simulate(
            stim, cfg.bias, cfg.modulator, cfg.link,
            n_periods=tones.n_periods, samples_per_period=tones.samples_per_period))

    # the fundamental must be in the small-signal regime for any fit
    x = np.log10(levels)
    y_f = np.log10([tone_power_w(e.amplitude(1), cfg.link.r_load) for e in extractions])
    fund_slope = float(np.polyfit(x, y_f, 1)[0])
    if abs(fund_slope - 1.0) > 0.01:
        raise NotInSmallSignalError(
            f"fundamental slope {fund_slope:.4f} is outside 1 +/- 0.01; reduce the "
            f"stimulus (try p_in_stop_dbm <= {tones.p_in_stop_dbm - 10.0:g})",
            suggested_v_amp=math.sqrt(2.0 * levels[-1] * cfg.link.r_source) / 3.0)

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "two_tone.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("p_in_dbm,p_fund_dbm,p_im2_dbm,p_im3_dbm,p_im5_dbm\n")
        for p_in, ext in zip(levels, extractions):
            # 2f1-f2 spur regardless of its asymptotic order label; 3f1-2f2 for IM5
            amp_by_freq = dict(zip(ext.freqs, ext.amps))
            im3_amp = amp_by_freq[abs(2 * tones.f1 - tones.f2)]
            im5_amp = amp_by_freq[abs(3 * tones.f1 - 2 * tones.f2)]
            im2_amp = amp_by_freq[abs(tones.f2 - tones.f1)]
            cols = [w_to_dbm(p_in)]
            cols += [w_to_dbm(tone_power_w(a, cfg.link.r_load))
                     for a in (ext.amplitude(1), im2_amp, im3_amp, im5_amp)]
            fh.write(",".join(_fmt(c) for c in cols) + "\n")

    fits: dict[str, object] = {}
    notes: dict[str, str] = {}
    for order, key in ((3, "iip3_dbm"), (5, "iip5_dbm")):
        try:
            iip_w = intercept_from_sweep(list(extractions), list(levels), order,
                                         cfg.link.r_load)
            fits[key] = _json_safe(w_to_dbm(iip_w))
        except ValueError:
            fits[key] = None
            notes[key] = f"no order-{order} tone at this bias"
        except NotInSmallSignalError as err:
            fits[key] = None
            notes[key] = str(err)
    payload = {"fits": fits, "notes": notes, "fund_slope": fund_slope,
               "tool": "ringlink", "version": __version__}
    _write_json(os.path.join(args.out, "intercepts.json"), payload)
    print(f"wrote {csv_path}")
    print(f"fitted intercepts: {fits}")
    return 0


def cmd_optimize(args) -> int:
    cfg = _load(args)
    if cfg.optimize is None:
        raise ConfigError("optimize section required for the optimize command")
    bias, metrics = optimize_bias(
        cfg.optimize.objective, cfg.modulator, cfg.link,
        constraints=cfg.optimize.constraints, bounds=cfg.optimize.bounds or None)
    print(f"objective {cfg.optimize.objective.value}: best bias "
          f"phi={bias.phi_bias:.6g} theta_dc={bias.theta_dc:.6g} tau={bias.tau:.6g}")
    print(f"  gain {metrics.gain_db:.3f} dB, NF {metrics.nf_db:.3f} dB, "
          f"SFDR {metrics.sfdr_db:.2f} dB")
    payload = {
        "objective": cfg.optimize.objective.value,
        "bias": {"phi_bias_rad": bias.phi_bias, "theta_dc_rad": bias.theta_dc,
                 "tau": bias.tau},
        "metrics": _metrics_payload(metrics),
        "tool": "ringlink", "version": __version__,
    }
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "optimize.json"), payload)
    return 0


def cmd_null_bias(args) -> int:
    cfg = _load(args)
    if cfg.null_bias is None:
        raise ConfigError("null_bias section required for the null-bias command")
    nb = cfg.null_bias
    result: NullBiasResult = null_bias_analysis(
        cfg.link, cfg.modulator, cfg.bias,
        p_laser_range=(nb.p_start_w, nb.p_stop_w),
        phi_bias_range=(nb.phi_start, nb.phi_stop),
        counts=(nb.count_phi, nb.count_p),
        target_current=nb.target_current,
    )
    os.makedirs(args.out, exist_ok=True)
    grid_path = os.path.join(args.out, "gain.csv")
    _write_grid_csv(grid_path, result.grid, "Gain")
    iso_path = os.path.join(args.out, "iso_current.csv")
    with open(iso_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("p_laser_w,phi_bias_rad,gain_db\n")
        for p, phi, g in zip(result.p_laser, result.phi_iso, result.gain_iso_db):
            fh.write(f"{_fmt(float(p))},{_fmt(float(phi))},{_fmt(float(g))}\n")
    print(f"wrote {grid_path}")
    print(f"wrote {iso_path} (target current {result.target_current * 1e3:.3g} mA, "
          f"{len(result.no_solution)} unreachable points)")
    valid = [g for g in result.gain_iso_db if math.isfinite(g)]
    if valid:
        print(f"gain along iso-current curve spans "
              f"{min(valid):.2f} .. {max(valid):.2f} dB")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringlink",
        description="RF photonic link budget and distortion analysis for "
                    "ring-assisted Mach-Zehnder modulators")
    parser.add_argument("--version", action="version", version=f"ringlink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON configuration file (defaults otherwise)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--metric", help="comma-separated metric list override")
        p.add_argument("--numeric", action="store_true",
                       help="allow lossy rings via the finite-difference path")
        p.add_argument("--modulator", help="override the drive topology, "
                                           "e.g. mzm-single")

    for name, fn, descr in (
        ("report", cmd_report, "single-point link metrics"),
        ("sweep", cmd_sweep, "grid sweep over one or two parameters"),
        ("two-tone", cmd_two_tone, "two-tone distortion table and intercept fits"),
        ("optimize", cmd_optimize, "constrained bias optimization"),
        ("null-bias", cmd_null_bias, "null-biasing / photodiode saturation analysis"),
    ):
        p = sub.add_parser(name, help=descr)
        add_common(p)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NotInSmallSignalError as err:
        print(f"oracle error: {err}", file=sys.stderr)
        return 4
    except (RinglinkError, ValueError) as err:
        print(f"model error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
