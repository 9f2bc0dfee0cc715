"""Design-space exploration: parameter sweeps, bias optimization, null biasing.

Grids are evaluated pointwise with the closed-form metric stack, so a
101 x 101 bias plane costs a fraction of a second. Cells are independent
pure evaluations; per-cell failures are recorded as flagged non-finite
values and never abort the grid.

The SFDR metric mapped on grids is the intercept-limited (second/third
order) dynamic range, +inf at exact linearized points -- the quantity the
bias-plane contour figures show. The finite fifth-order-limited value at
those points comes from distortion.sfdr().
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import __version__
from .device import BiasPoint, ModulatorSpec
from .distortion import compute_link_metrics, iip2, iip3, sfdr_third_order_db
from .errors import InfeasibleError
from .link import (
    LinkMetrics,
    LinkParams,
    avg_photocurrent,
    iso_current_arm_bias,
    link_gain,
    noise_figure,
    output_noise_density,
)

SWEEPABLE_PARAMS = ("theta_dc", "tau", "phi_bias", "p_laser", "channel_loss", "v_pi")
METRICS = ("Gain", "NF", "SFDR", "IIP3", "IIP2", "NoisePSD", "Photocurrent")

_BIAS_PARAMS = {"theta_dc", "tau", "phi_bias"}
_LINK_PARAMS = {"p_laser", "channel_loss"}
_MOD_PARAMS = {"v_pi"}


@dataclass(frozen=True)
class AxisSpec:
    param: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.param not in SWEEPABLE_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.param!r}")
        if self.count < 2:
            raise ValueError("axis count must be at least 2")
        if not self.start < self.stop:
            raise ValueError("axis start must be below stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    axis1: AxisSpec
    axis2: AxisSpec | None
    bias: BiasPoint
    modulator: ModulatorSpec
    link: LinkParams
    metrics: tuple[str, ...] = ("Gain", "NF", "SFDR")

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.param == self.axis1.param:
            raise ValueError("swept parameters must be distinct")
        for m in self.metrics:
            if m not in METRICS:
                raise ValueError(f"unknown metric {m!r}")


@dataclass
class SweepGrid:
    """Rectangular grid of metric values over one or two swept parameters.

    data arrays have shape (axis1.count, axis2.count) with a singleton
    second axis for 1D sweeps. Non-finite cells are listed in flags with
    a reason. created_at is informational only and never serialized, so
    identical specs produce byte-identical output files.
    """

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str | None
    axis2_values: np.ndarray | None
    data: dict[str, np.ndarray]
    flags: dict[str, list[tuple[int, int, str]]]
    meta: dict[str, str]
    created_at: float = field(default_factory=time.time, compare=False)


def _cell_state(spec: SweepSpec, overrides: dict[str, float]):
    bias, mod, link = spec.bias, spec.modulator, spec.link
    bias_kw = {k: v for k, v in overrides.items() if k in _BIAS_PARAMS}
    link_kw = {k: v for k, v in overrides.items() if k in _LINK_PARAMS}
    mod_kw = {k: v for k, v in overrides.items() if k in _MOD_PARAMS}
    if bias_kw:
        bias = replace(bias, **bias_kw)
    if link_kw:
        link = replace(link, **link_kw)
    if mod_kw:
        mod = replace(mod, **mod_kw)
    return bias, mod, link


def _w_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3) if p_w > 0 else -math.inf


def _eval_metric(metric: str, bias, mod, link) -> float:
    if metric == "Gain":
        g = link_gain(bias, mod, link)
        return 10.0 * math.log10(g) if g > 0 else -math.inf
    if metric == "NF":
        return noise_figure(bias, mod, link)
    if metric == "SFDR":
        return sfdr_third_order_db(bias, mod, link)
    if metric == "IIP3":
        i3 = iip3(bias, mod, link)
        return math.inf if math.isinf(i3) else _w_to_dbm(i3)
    if metric == "IIP2":
        i2 = iip2(bias, mod, link)
        return math.inf if math.isinf(i2) else _w_to_dbm(i2)
    if metric == "NoisePSD":
        return 10.0 * math.log10(output_noise_density(bias, mod, link) / 1e-3)
    if metric == "Photocurrent":
        return avg_photocurrent(bias, mod, link)
    raise ValueError(f"unknown metric {metric!r}")  # pragma: no cover


def run_sweep(spec: SweepSpec) -> SweepGrid:
    """Evaluate the requested metrics over the grid. Deterministic."""
    ax1 = spec.axis1.values()
    ax2 = spec.axis2.values() if spec.axis2 is not None else None
    n1 = len(ax1)
    n2 = len(ax2) if ax2 is not None else 1
    data = {m: np.empty((n1, n2)) for m in spec.metrics}
    flags: dict[str, list[tuple[int, int, str]]] = {m: [] for m in spec.metrics}
    for i in range(n1):
        for j in range(n2):
            overrides = {spec.axis1.param: float(ax1[i])}
            if spec.axis2 is not None:
                overrides[spec.axis2.param] = float(ax2[j])
            try:
                bias, mod, link = _cell_state(spec, overrides)
            except ValueError as err:
                for m in spec.metrics:
                    data[m][i, j] = math.nan
                    flags[m].append((i, j, str(err)))
                continue
            for m in spec.metrics:
                try:
                    val = _eval_metric(m, bias, mod, link)
                except Exception as err:
                    data[m][i, j] = math.nan
                    flags[m].append((i, j, str(err)))
                    continue
                data[m][i, j] = val
                if not math.isfinite(val):
                    flags[m].append((i, j, "non-finite metric value"))
    meta = {
        "tool": "ringlink",
        "version": __version__,
        "axis1": f"{spec.axis1.param}[{spec.axis1.start}:{spec.axis1.stop}:{spec.axis1.count}]",
    }
    if spec.axis2 is not None:
        meta["axis2"] = (f"{spec.axis2.param}[{spec.axis2.start}:"
                         f"{spec.axis2.stop}:{spec.axis2.count}]")
    return SweepGrid(
        axis1_name=spec.axis1.param,
        axis1_values=ax1,
        axis2_name=spec.axis2.param if spec.axis2 is not None else None,
        axis2_values=ax2,
        data=data,
        flags=flags,
        meta=meta,
    )


class Objective(Enum):
    MAX_SFDR = "max-sfdr"
    MAX_GAIN = "max-gain"
    MIN_NF = "min-nf"


@dataclass(frozen=True)
class OptimizeConstraints:
    min_gain: float | None = None          # linear power gain floor
    max_nf_db: float | None = None
    max_photocurrent: float | None = None  # amps


DEFAULT_BOUNDS = {
    "phi_bias": (0.0, math.pi),
    "theta_dc": (0.0, 2.0 * math.pi),
    "tau": (0.05, 0.95),
}
_COARSE_COUNTS = {"phi_bias": 17, "theta_dc": 33, "tau": 19}


def _objective_value(obj: Objective, bias, mod, link) -> float:
    if obj is Objective.MAX_SFDR:
        return sfdr_third_order_db(bias, mod, link)
    if obj is Objective.MAX_GAIN:
        return link_gain(bias, mod, link)
    if obj is Objective.MIN_NF:
        return -noise_figure(bias, mod, link)
    raise ValueError(obj)  # pragma: no cover


def _feasible(bias, mod, link, cons: OptimizeConstraints) -> bool:
    if cons.min_gain is not None and link_gain(bias, mod, link) < cons.min_gain:
        return False
    if cons.max_nf_db is not None and noise_figure(bias, mod, link) > cons.max_nf_db:
        return False
    if (cons.max_photocurrent is not None
            and avg_photocurrent(bias, mod, link) > cons.max_photocurrent):
        return False
    return True


def optimize_bias(
    objective: Objective,
    mod: ModulatorSpec,
    link: LinkParams,
    constraints: OptimizeConstraints | None = None,
    bounds: dict[str, tuple[float, float]] | None = None,
    refine_levels: int = 3,
) -> tuple[BiasPoint, LinkMetrics]:
    """Constrained bias search: coarse scan plus local grid refinement.

    The metrics contain infinite plateaus (intercept nulls), so the
    search is a deterministic grid scan refined by halving the cell size
    around the incumbent, not a gradient method. Ties break toward the
    lexicographically smallest (phi_bias, theta_dc, tau). Lossless rings
    are assumed (the closed-form metric stack).
    """
    cons = constraints or OptimizeConstraints()
    bnds = dict(DEFAULT_BOUNDS)
    if bounds:
        for key, rng in bounds.items():
            if key not in bnds:
                raise ValueError(f"unknown bound {key!r}")
            bnds[key] = (float(rng[0]), float(rng[1]))

    def make_bias(phi, thdc, tau):
        return BiasPoint(phi_bias=phi, theta_dc=thdc, tau=tau)

    def evaluate(phi, thdc, tau):
        bias = make_bias(phi, thdc, tau)
        if not _feasible(bias, mod, link, cons):
            return None
        val = _objective_value(objective, bias, mod, link)
        if math.isnan(val):
            return None
        return val

    best_val = -math.inf
    best_key: tuple[float, float, float] | None = None

    def consider(phi, thdc, tau):
        nonlocal best_val, best_key
        val = evaluate(phi, thdc, tau)
        if val is None:
            return
        key = (phi, thdc, tau)
        if val > best_val or (val == best_val and best_key is not None and key < best_key):
            best_val = val
            best_key = key

    axes = {}
    for name in ("phi_bias", "theta_dc", "tau"):
        lo, hi = bnds[name]
        axes[name] = np.linspace(lo, hi, _COARSE_COUNTS[name])
    for phi in axes["phi_bias"]:
        for thdc in axes["theta_dc"]:
            for tau in axes["tau"]:
                consider(float(phi), float(thdc), float(tau))
    if best_key is None:
        raise InfeasibleError("no coarse-grid point satisfies the constraints")

    steps = {
        name: (bnds[name][1] - bnds[name][0]) / (_COARSE_COUNTS[name] - 1)
        for name in ("phi_bias", "theta_dc", "tau")
    }
    for _ in range(refine_levels):
        center = best_key
        local = {}
        for idx, name in enumerate(("phi_bias", "theta_dc", "tau")):
            lo, hi = bnds[name]
            span = steps[name]
            local[name] = np.clip(np.linspace(center[idx] - span, center[idx] + span, 5), lo, hi)
            steps[name] = span / 2.0
        for phi in local["phi_bias"]:
            for thdc in local["theta_dc"]:
                for tau in local["tau"]:
                    consider(float(phi), float(thdc), float(tau))

    bias = make_bias(*best_key)
    return bias, compute_link_metrics(bias, mod, link)


@dataclass
class NullBiasResult:
    """Gain map over (arm bias, laser power) plus the iso-current curve."""

    grid: SweepGrid
    p_laser: np.ndarray
    phi_iso: np.ndarray        # arm bias holding the target current; NaN if unreachable
    gain_iso_db: np.ndarray
    target_current: float
    no_solution: list[int]     # indices of p_laser where the target is unreachable


def null_bias_analysis(
    link: LinkParams,
    mod: ModulatorSpec,
    base_bias: BiasPoint,
    p_laser_range: tuple[float, float],
    phi_bias_range: tuple[float, float] = (0.0, math.pi),
    counts: tuple[int, int] = (101, 101),
    target_current: float | None = None,
) -> NullBiasResult:
    """Gain over (phi_bias, P_I) with the constant-photocurrent contour.

    The iso-current arm bias comes from the closed-form inversion of the
    photocurrent relation, so avg_photocurrent along the curve equals the
    target exactly. Ring settings (theta_dc, tau, alpha) are taken from
    base_bias; its phi_bias is ignored.
    """
    target = link.pd_sat_current if target_current is None else target_current
    spec = SweepSpec(
        axis1=AxisSpec("phi_bias", phi_bias_range[0], phi_bias_range[1], counts[0]),
        axis2=AxisSpec("p_laser", p_laser_range[0], p_laser_range[1], counts[1]),
        bias=base_bias,
        modulator=mod,
        link=link,
        metrics=("Gain", "NF", "NoisePSD"),
    )
    grid = run_sweep(spec)

    p_vals = grid.axis2_values
    phi_iso = np.empty(len(p_vals))
    gain_iso = np.empty(len(p_vals))
    missing: list[int] = []
    for k, p in enumerate(p_vals):
        cell_link = replace(link, p_laser=float(p))
        phi = iso_current_arm_bias(target, mod, cell_link)
        phi_iso[k] = phi
        if math.isnan(phi):
            missing.append(k)
            gain_iso[k] = math.nan
            continue
        bias = replace(base_bias, phi_bias=phi)
        g = link_gain(bias, mod, cell_link)
        gain_iso[k] = 10.0 * math.log10(g) if g > 0 else -math.inf
    return NullBiasResult(
        grid=grid,
        p_laser=np.asarray(p_vals),
        phi_iso=phi_iso,
        gain_iso_db=gain_iso,
        target_current=target,
        no_solution=missing,
    )
