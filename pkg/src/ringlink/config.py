"""Configuration files: strict JSON schema with explicit units.

All dB <-> linear and pi-multiple <-> radian conversions happen here; the
core modules only ever see linear SI quantities. Unit-bearing keys carry
the unit in their name (p_laser_dbm vs p_laser_w, theta_dc_pi vs
theta_dc_rad), one angle convention per file, and unknown keys are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .device import BiasPoint, DriveTopology, ModulatorSpec
from .errors import ConfigError
from .link import LinkParams
from .sweep import (
    METRICS,
    AxisSpec,
    Objective,
    OptimizeConstraints,
)

ANGULAR_PARAMS = ("phi_bias", "theta_dc", "psi_path")


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def w_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w / 1e-3) if w > 0 else -math.inf


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


class _Section:
    """Dict wrapper that tracks consumed keys and rejects leftovers."""

    def __init__(self, name: str, data: dict):
        if not isinstance(data, dict):
            raise ConfigError(f"section '{name}' must be an object")
        self.name = name
        self.data = dict(data)

    def take(self, key, default=None, required=False):
        if key in self.data:
            return self.data.pop(key)
        if required:
            raise ConfigError(f"missing required field '{self.name}.{key}'")
        return default

    def has(self, key) -> bool:
        return key in self.data

    def finish(self):
        if self.data:
            stray = sorted(self.data)[0]
            raise ConfigError(f"unknown key '{stray}' in section '{self.name}'")


class _AngleTracker:
    def __init__(self):
        self.seen: set[str] = set()

    def use(self, convention: str, where: str):
        self.seen.add(convention)
        if len(self.seen) > 1:
            raise ConfigError(
                f"mixed angle conventions: '{where}' uses _{convention} but the "
                "file already uses the other convention; pick _rad or _pi keys"
            )


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{where}' must be a number")
    return float(value)


def _angle(sec: _Section, base: str, angles: _AngleTracker, default: float) -> float:
    """Read an angle given as either <base>_rad or <base>_pi."""
    has_rad = sec.has(f"{base}_rad")
    has_pi = sec.has(f"{base}_pi")
    if has_rad and has_pi:
        raise ConfigError(f"both '{sec.name}.{base}_rad' and '{sec.name}.{base}_pi' given")
    if has_rad:
        angles.use("rad", f"{sec.name}.{base}_rad")
        return _number(sec.take(f"{base}_rad"), f"{sec.name}.{base}_rad")
    if has_pi:
        angles.use("pi", f"{sec.name}.{base}_pi")
        return _number(sec.take(f"{base}_pi"), f"{sec.name}.{base}_pi") * math.pi
    return default


def _exclusive(sec: _Section, key_a: str, key_b: str, conv_a, default: float) -> float:
    """Read a value given either as key_a (converted) or key_b (as-is)."""
    has_a, has_b = sec.has(key_a), sec.has(key_b)
    if has_a and has_b:
        raise ConfigError(f"both '{sec.name}.{key_a}' and '{sec.name}.{key_b}' given")
    if has_a:
        return conv_a(_number(sec.take(key_a), f"{sec.name}.{key_a}"))
    if has_b:
        return _number(sec.take(key_b), f"{sec.name}.{key_b}")
    return default


@dataclass(frozen=True)
class ToneSweepConfig:
    f1: float
    f2: float
    p_in_start_dbm: float
    p_in_stop_dbm: float
    count: int
    n_periods: int = 1
    samples_per_period: int = 256

    def p_in_levels_w(self) -> tuple[float, ...]:
        """Per-tone input power levels [W], log-spaced over the dBm range."""
        return tuple(dbm_to_w(d) for d in
                     np.linspace(self.p_in_start_dbm, self.p_in_stop_dbm, self.count))


@dataclass(frozen=True)
class OptimizeConfig:
    objective: Objective
    constraints: OptimizeConstraints = OptimizeConstraints()
    bounds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NullBiasConfig:
    p_start_w: float
    p_stop_w: float
    count_p: int
    phi_start: float
    phi_stop: float
    count_phi: int
    target_current: float | None = None


@dataclass(frozen=True)
class SweepConfig:
    axis1: AxisSpec
    axis2: AxisSpec | None
    metrics: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    link: LinkParams
    modulator: ModulatorSpec
    bias: BiasPoint
    sweep: SweepConfig | None = None
    tones: ToneSweepConfig | None = None
    optimize: OptimizeConfig | None = None
    null_bias: NullBiasConfig | None = None


def _parse_link(raw: dict, angles: _AngleTracker) -> LinkParams:
    sec = _Section("link", raw)
    p_laser = _exclusive(sec, "p_laser_dbm", "p_laser_w", dbm_to_w, dbm_to_w(13.0))
    channel_loss = _exclusive(sec, "channel_loss_db", "channel_loss", db_to_linear, 1.0)
    turns = sec.take("transformer_turns")
    if turns is not None:
        turns = _number(turns, "link.transformer_turns")
    try:
        params = LinkParams(
            p_laser=p_laser,
            rin_db_hz=_number(sec.take("rin_db_hz", -145.0), "link.rin_db_hz"),
            r_source=_number(sec.take("r_source_ohm", 50.0), "link.r_source_ohm"),
            r_load=_number(sec.take("r_load_ohm", 50.0), "link.r_load_ohm"),
            responsivity=_number(sec.take("responsivity_a_w", 1.1), "link.responsivity_a_w"),
            channel_loss=channel_loss,
            bandwidth_hz=_number(sec.take("bandwidth_hz", 1.0), "link.bandwidth_hz"),
            temperature_k=_number(sec.take("temperature_k", 290.0), "link.temperature_k"),
            transformer_turns=turns,
            pd_sat_current=_number(sec.take("pd_sat_current_a", 15.5e-3),
                                   "link.pd_sat_current_a"),
        )
    except ValueError as err:
        raise ConfigError(f"link: {err}") from err
    sec.finish()
    return params


def _parse_modulator(raw: dict, angles: _AngleTracker, present: bool) -> ModulatorSpec:
    sec = _Section("modulator", raw)
    v_pi = _number(sec.take("v_pi_v", 5.0 if not present else None,
                            required=present), "modulator.v_pi_v")
    loss = _exclusive(sec, "insertion_loss_db", "insertion_loss",
                      db_to_linear, db_to_linear(10.0))
    drive_raw = sec.take("drive", "ramzm-matched")
    try:
        drive = DriveTopology(drive_raw)
    except ValueError:
        raise ConfigError(
            f"modulator.drive must be one of "
            f"{[d.value for d in DriveTopology]}, got {drive_raw!r}") from None
    try:
        spec = ModulatorSpec(
            v_pi=v_pi,
            insertion_loss=loss,
            electrode_r=_number(sec.take("electrode_r_ohm", 5.0), "modulator.electrode_r_ohm"),
            electrode_c=_number(sec.take("electrode_c_f", 200e-15), "modulator.electrode_c_f"),
            drive=drive,
        )
    except ValueError as err:
        raise ConfigError(f"modulator: {err}") from err
    sec.finish()
    return spec


def _parse_bias(raw: dict, angles: _AngleTracker) -> BiasPoint:
    sec = _Section("bias", raw)
    try:
        bias = BiasPoint(
            phi_bias=_angle(sec, "phi_bias", angles, math.pi / 2.0),
            theta_dc=_angle(sec, "theta_dc", angles, math.pi),
            tau=_number(sec.take("tau", 0.5), "bias.tau"),
            alpha=_number(sec.take("alpha", 1.0), "bias.alpha"),
            psi_path=_angle(sec, "psi_path", angles, 0.0),
        )
    except ValueError as err:
        raise ConfigError(f"bias: {err}") from err
    sec.finish()
    return bias


def _parse_axis(name: str, raw: dict, angles: _AngleTracker) -> AxisSpec:
    sec = _Section(name, raw)
    param = sec.take("param", required=True)
    if param in ANGULAR_PARAMS:
        start = _angle(sec, "start", angles, None)
        stop = _angle(sec, "stop", angles, None)
        if start is None or stop is None:
            raise ConfigError(f"{name}: angular axis needs start/stop with _rad or _pi")
    else:
        start = _number(sec.take("start", required=True), f"{name}.start")
        stop = _number(sec.take("stop", required=True), f"{name}.stop")
    count = sec.take("count", required=True)
    if not isinstance(count, int):
        raise ConfigError(f"{name}.count must be an integer")
    sec.finish()
    try:
        return AxisSpec(param, start, stop, count)
    except ValueError as err:
        raise ConfigError(f"{name}: {err}") from err


def _parse_sweep(raw: dict, angles: _AngleTracker) -> SweepConfig:
    sec = _Section("sweep", raw)
    axis1 = _parse_axis("sweep.axis1", sec.take("axis1", required=True), angles)
    axis2_raw = sec.take("axis2")
    axis2 = _parse_axis("sweep.axis2", axis2_raw, angles) if axis2_raw is not None else None
    metrics = sec.take("metrics", ["Gain", "NF", "SFDR"])
    if (not isinstance(metrics, list) or not metrics
            or any(m not in METRICS for m in metrics)):
        raise ConfigError(f"sweep.metrics must be a non-empty subset of {list(METRICS)}")
    sec.finish()
    if axis2 is not None and axis2.param == axis1.param:
        raise ConfigError("sweep axes must use distinct parameters")
    return SweepConfig(axis1=axis1, axis2=axis2, metrics=tuple(metrics))


def _parse_tones(raw: dict) -> ToneSweepConfig:
    sec = _Section("tones", raw)
    f1 = _number(sec.take("f1_hz", 0.9e9), "tones.f1_hz")
    f2 = _number(sec.take("f2_hz", 1.0e9), "tones.f2_hz")
    start = _number(sec.take("p_in_start_dbm", -35.0), "tones.p_in_start_dbm")
    stop = _number(sec.take("p_in_stop_dbm", -20.0), "tones.p_in_stop_dbm")
    count = sec.take("count", 6)
    if not isinstance(count, int) or count < 4:
        raise ConfigError("tones.count must be an integer >= 4")
    if start >= stop:
        raise ConfigError("tones.p_in_start_dbm must be below p_in_stop_dbm")
    n_periods = sec.take("n_periods", 1)
    spp = sec.take("samples_per_period", 256)
    if not isinstance(n_periods, int) or n_periods < 1:
        raise ConfigError("tones.n_periods must be a positive integer")
    if not isinstance(spp, int) or spp < 16:
        raise ConfigError("tones.samples_per_period must be an integer >= 16")
    sec.finish()
    return ToneSweepConfig(f1=f1, f2=f2, p_in_start_dbm=start, p_in_stop_dbm=stop,
                           count=count, n_periods=n_periods, samples_per_period=spp)


def _parse_optimize(raw: dict, angles: _AngleTracker) -> OptimizeConfig:
    sec = _Section("optimize", raw)
    obj_raw = sec.take("objective", required=True)
    try:
        objective = Objective(obj_raw)
    except ValueError:
        raise ConfigError(
            f"optimize.objective must be one of {[o.value for o in Objective]}") from None
    cons = OptimizeConstraints()
    cons_raw = sec.take("constraints")
    if cons_raw is not None:
        csec = _Section("optimize.constraints", cons_raw)
        min_gain = _exclusive(csec, "min_gain_db", "min_gain", db_to_linear, None)
        max_nf = csec.take("max_nf_db")
        max_pc = csec.take("max_photocurrent_a")
        cons = OptimizeConstraints(
            min_gain=min_gain,
            max_nf_db=_number(max_nf, "optimize.constraints.max_nf_db")
            if max_nf is not None else None,
            max_photocurrent=_number(max_pc, "optimize.constraints.max_photocurrent_a")
            if max_pc is not None else None,
        )
        csec.finish()
    bounds = {}
    bounds_raw = sec.take("bounds")
    if bounds_raw is not None:
        bsec = _Section("optimize.bounds", bounds_raw)
        for param in ("phi_bias", "theta_dc", "tau"):
            rng = bsec.take(param)
            if rng is None:
                continue
            rsec = _Section(f"optimize.bounds.{param}", rng)
            if param in ANGULAR_PARAMS:
                lo = _angle(rsec, "start", angles, None)
                hi = _angle(rsec, "stop", angles, None)
                if lo is None or hi is None:
                    raise ConfigError(
                        f"optimize.bounds.{param} needs start/stop with _rad or _pi")
            else:
                lo = _number(rsec.take("start", required=True), f"bounds.{param}.start")
                hi = _number(rsec.take("stop", required=True), f"bounds.{param}.stop")
            rsec.finish()
            bounds[param] = (lo, hi)
        bsec.finish()
    sec.finish()
    return OptimizeConfig(objective=objective, constraints=cons, bounds=bounds)


def _parse_null_bias(raw: dict, angles: _AngleTracker) -> NullBiasConfig:
    sec = _Section("null_bias", raw)
    p_start = _exclusive(sec, "p_laser_start_dbm", "p_laser_start_w", dbm_to_w, dbm_to_w(20.0))
    p_stop = _exclusive(sec, "p_laser_stop_dbm", "p_laser_stop_w", dbm_to_w, dbm_to_w(30.0))
    count_p = sec.take("count_p", 101)
    count_phi = sec.take("count_phi", 101)
    for nm, v in (("count_p", count_p), ("count_phi", count_phi)):
        if not isinstance(v, int) or v < 2:
            raise ConfigError(f"null_bias.{nm} must be an integer >= 2")
    phi_start = _angle(sec, "phi_start", angles, 0.0)
    phi_stop = _angle(sec, "phi_stop", angles, math.pi)
    target = sec.take("target_current_a")
    if target is not None:
        target = _number(target, "null_bias.target_current_a")
    sec.finish()
    if p_start >= p_stop:
        raise ConfigError("null_bias laser power range must be increasing")
    return NullBiasConfig(p_start_w=p_start, p_stop_w=p_stop, count_p=count_p,
                          phi_start=phi_start, phi_stop=phi_stop, count_phi=count_phi,
                          target_current=target)


def parse_config(data: dict) -> RunConfig:
    """Parse an already-decoded JSON document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be an object")
    top = _Section("top-level", data)
    angles = _AngleTracker()
    link = _parse_link(top.take("link", {}), angles)
    mod_raw = top.take("modulator")
    modulator = _parse_modulator(mod_raw if mod_raw is not None else {}, angles,
                                 present=mod_raw is not None)
    bias = _parse_bias(top.take("bias", {}), angles)
    sweep_raw = top.take("sweep")
    tones_raw = top.take("tones")
    optimize_raw = top.take("optimize")
    null_raw = top.take("null_bias")
    top.finish()
    return RunConfig(
        link=link,
        modulator=modulator,
        bias=bias,
        sweep=_parse_sweep(sweep_raw, angles) if sweep_raw is not None else None,
        tones=_parse_tones(tones_raw) if tones_raw is not None else None,
        optimize=_parse_optimize(optimize_raw, angles) if optimize_raw is not None else None,
        null_bias=_parse_null_bias(null_raw, angles) if null_raw is not None else None,
    )


def load_config(path: str) -> RunConfig:
    """Read and parse a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: invalid JSON: {err.msg}") from None
    return parse_config(data)


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical (linear SI, radian) serialization of a RunConfig.

    Re-parsing the result reproduces an identical in-memory configuration.
    """
    out: dict = {
        "link": {
            "p_laser_w": cfg.link.p_laser,
            "rin_db_hz": cfg.link.rin_db_hz,
            "r_source_ohm": cfg.link.r_source,
            "r_load_ohm": cfg.link.r_load,
            "responsivity_a_w": cfg.link.responsivity,
            "channel_loss": cfg.link.channel_loss,
            "bandwidth_hz": cfg.link.bandwidth_hz,
            "temperature_k": cfg.link.temperature_k,
            "transformer_turns": cfg.link.transformer_turns,
            "pd_sat_current_a": cfg.link.pd_sat_current,
        },
        "modulator": {
            "v_pi_v": cfg.modulator.v_pi,
            "insertion_loss": cfg.modulator.insertion_loss,
            "electrode_r_ohm": cfg.modulator.electrode_r,
            "electrode_c_f": cfg.modulator.electrode_c,
            "drive": cfg.modulator.drive.value,
        },
        "bias": {
            "phi_bias_rad": cfg.bias.phi_bias,
            "theta_dc_rad": cfg.bias.theta_dc,
            "tau": cfg.bias.tau,
            "alpha": cfg.bias.alpha,
            "psi_path_rad": cfg.bias.psi_path,
        },
    }
    if cfg.sweep is not None:
        def axis_dict(ax: AxisSpec) -> dict:
            key = "_rad" if ax.param in ANGULAR_PARAMS else ""
            return {"param": ax.param, f"start{key}": ax.start,
                    f"stop{key}": ax.stop, "count": ax.count}
        sweep: dict = {"axis1": axis_dict(cfg.sweep.axis1),
                       "metrics": list(cfg.sweep.metrics)}
        if cfg.sweep.axis2 is not None:
            sweep["axis2"] = axis_dict(cfg.sweep.axis2)
        out["sweep"] = sweep
    if cfg.tones is not None:
        out["tones"] = {
            "f1_hz": cfg.tones.f1,
            "f2_hz": cfg.tones.f2,
            "p_in_start_dbm": cfg.tones.p_in_start_dbm,
            "p_in_stop_dbm": cfg.tones.p_in_stop_dbm,
            "count": cfg.tones.count,
            "n_periods": cfg.tones.n_periods,
            "samples_per_period": cfg.tones.samples_per_period,
        }
    if cfg.optimize is not None:
        opt: dict = {"objective": cfg.optimize.objective.value}
        cons = cfg.optimize.constraints
        if (cons.min_gain, cons.max_nf_db, cons.max_photocurrent) != (None, None, None):
            block: dict = {}
            if cons.min_gain is not None:
                block["min_gain"] = cons.min_gain
            if cons.max_nf_db is not None:
                block["max_nf_db"] = cons.max_nf_db
            if cons.max_photocurrent is not None:
                block["max_photocurrent_a"] = cons.max_photocurrent
            opt["constraints"] = block
        if cfg.optimize.bounds:
            opt["bounds"] = {
                param: ({"start_rad": lo, "stop_rad": hi}
                        if param in ANGULAR_PARAMS else {"start": lo, "stop": hi})
                for param, (lo, hi) in cfg.optimize.bounds.items()
            }
        out["optimize"] = opt
    if cfg.null_bias is not None:
        nb = cfg.null_bias
        out["null_bias"] = {
            "p_laser_start_w": nb.p_start_w,
            "p_laser_stop_w": nb.p_stop_w,
            "count_p": nb.count_p,
            "phi_start_rad": nb.phi_start,
            "phi_stop_rad": nb.phi_stop,
            "count_phi": nb.count_phi,
            "target_current_a": nb.target_current,
        }
    return out
