"""Brute-force verification engine: finite differences and two-tone runs.

Nothing in this module uses the closed-form Taylor coefficients or the
closed-form intercept expressions; it differentiates and simulates the
exact transfer functions so it can serve as the independent check on them
(and as the computation of record where no closed form exists, e.g. lossy
rings and fifth-order intercepts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np

from .device import (
    BiasPoint,
    DriveTopology,
    ModulatorSpec,
    TaylorCoefficients,
    drive_transmission,
)
from .errors import AliasError, NotInSmallSignalError, StepTooSmallError
from .link import LinkParams

# Eq.-36-style denominator below this magnitude counts as an exact
# third-order null for tone-order labeling.
GAMMA3_NULL_EPS = 1e-9

FUND_SLOPE_TOL = 0.01
IMN_SLOPE_TOL = 0.05


@dataclass(frozen=True)
class ToneStimulus:
    """Two-tone drive: v(t) = v_amp [sin(2 pi f1 t) + sin(2 pi f2 t)].

    v_amp : peak voltage per tone [V].
    f1, f2: tone frequencies [Hz]; their ratio must be a small rational so
            the record is exactly periodic.
    v_pi  : modulator V_pi [V], fixing theta_mod = pi v_amp / v_pi.
    """

    v_amp: float
    f1: float
    f2: float
    v_pi: float

    def __post_init__(self):
        if self.v_amp <= 0:
            raise ValueError("v_amp must be positive")
        if self.f1 == self.f2 or self.f1 <= 0 or self.f2 <= 0:
            raise ValueError("f1, f2 must be distinct positive frequencies")
        if self.theta_amp >= math.pi:
            raise ValueError("per-tone phase amplitude must stay below pi")

    @property
    def theta_amp(self) -> float:
        """Per-tone phase modulation amplitude [rad]."""
        return math.pi * self.v_amp / self.v_pi

    def p_in(self, r_source: float) -> float:
        """Available input power per tone, P_in = v_amp^2 / (2 R_s)."""
        return self.v_amp**2 / (2.0 * r_source)

    def with_v_amp(self, v_amp: float) -> "ToneStimulus":
        return ToneStimulus(v_amp, self.f1, self.f2, self.v_pi)


@dataclass(frozen=True)
class ToneExtraction:
    """Tone amplitudes extracted from one two-tone simulation.

    freqs  : tone frequencies [Hz].
    amps   : peak detector-current amplitudes [A].
    orders : leading intermod order of each tone (1, 2, 3, or 5). The bin
             at 2 f1 - f2 is labeled 5 instead of 3 when the bias nulls
             the cubic coefficient exactly, since the residual spur there
             grows with the fifth power of drive amplitude.
    """

    freqs: tuple[float, ...]
    amps: tuple[float, ...]
    orders: tuple[int, ...]

    def amplitude(self, order: int) -> float:
        """Largest extracted amplitude of the given intermod order."""
        cands = [a for a, o in zip(self.amps, self.orders) if o == order]
        if not cands:
            raise ValueError(f"no tone of order {order} was extracted")
        return max(cands)


def _transmission_mp(x, bias: BiasPoint):
    """Exact RAMZM transmission in mpmath arithmetic (any alpha)."""
    tau = mp.mpf(bias.tau)
    alpha = mp.mpf(bias.alpha)

    def ring(t):
        z = alpha * mp.e ** (-1j * t)
        return (tau - z) / (1 - tau * z)

    a_bias = ring(mp.mpf(bias.theta_dc) - x)
    a_partner = ring(mp.mpf(bias.theta_dc) + x)
    e = (mp.conj(a_bias) * mp.e ** (-1j * mp.mpf(bias.phi_bias))
         + mp.conj(a_partner) * mp.e ** (-1j * mp.mpf(bias.psi_path))) / 2
    return abs(e) ** 2


def finite_diff_coeffs(bias: BiasPoint, order: int = 4, h: float = 1e-3) -> TaylorCoefficients:
    """Taylor coefficients by central differences of the exact transmission.

    Central stencils at steps h and h/2 are Richardson-extrapolated to
    remove the leading truncation term. Stencil values are evaluated in
    extended precision so the extrapolated estimates are truncation-, not
    roundoff-, limited; the h-to-h/2 consistency check still guards
    against a step too small for the requested order. Valid for any alpha.
    """
    if not 1e-4 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-4, 1e-2]")
    if not 0 <= order <= 4:
        raise ValueError("order must be at most 4")

    with mp.workdps(40):
        def t_of(x):
            return _transmission_mp(mp.mpf(x), bias)

        def stencil(step):
            step = mp.mpf(step)
            tm2, tm1, t0, tp1, tp2 = (t_of(-2 * step), t_of(-step), t_of(0.0),
                                      t_of(step), t_of(2 * step))
            d1 = (tp1 - tm1) / (2 * step)
            d2 = (tp1 - 2 * t0 + tm1) / step**2
            d3 = (tp2 - 2 * tp1 + 2 * tm1 - tm2) / (2 * step**3)
            d4 = (tp2 - 4 * tp1 + 6 * t0 - 4 * tm1 + tm2) / step**4
            # map derivatives onto the expansion sign convention
            return [2 * t0, -d1, -d2 / 2, d3 / 6, d4 / 24]

        coarse = stencil(h)
        fine = stencil(h / 2)
        for k in range(1, order + 1):
            scale = max(abs(float(fine[k])), 1e-9)
            if abs(float(coarse[k] - fine[k])) / scale > 1e-3:
                raise StepTooSmallError(
                    f"gamma{k} estimate moved by more than 1e-3 relative "
                    f"between steps {h} and {h / 2}"
                )
        extrap = [(4 * f - c) / 3 for c, f in zip(coarse, fine)]
        vals = [float(v) for v in extrap]
    for k in range(order + 1, 5):
        vals[k] = math.nan
    return TaylorCoefficients(*vals)


def _rationalize_tones(f1: float, f2: float) -> tuple[int, int, float]:
    """Smallest integers (m1, m2) with f1:f2 = m1:m2, plus the base frequency."""
    frac = Fraction(f1 / f2).limit_denominator(10_000)
    m1, m2 = frac.numerator, frac.denominator
    base = f1 / m1
    if abs(m1 * f2 - m2 * f1) > 1e-6 * f2:
        raise ValueError("f1/f2 is not a small rational; tones would leak")
    return m1, m2, base


def two_tone_simulate(
    stim: ToneStimulus,
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    n_periods: int = 1,
    samples_per_period: int = 256,
) -> ToneExtraction:
    """Drive the exact transmission with two tones and extract the spurs.

    The record spans an integer number of common periods, so projection on
    the tone basis is exact (no window, no leakage). Extracted amplitudes
    are peak detector currents at f1, f2, f2 +/- f1, 2 f1 +/- f2, and
    3 f1 - 2 f2.
    """
    m1, m2, _ = _rationalize_tones(stim.f1, stim.f2)
    if m1 > m2:
        m1, m2 = m2, m1
    if 2 * m1 - m2 <= 0:
        raise ValueError("tone spacing must satisfy 2 m1 - m2 > 0")
    if 5 * max(m1, m2) >= samples_per_period // 2:
        raise AliasError(
            f"5*max(m1,m2)={5 * max(m1, m2)} exceeds the Nyquist bin "
            f"{samples_per_period // 2}; raise samples_per_period"
        )

    n = n_periods * samples_per_period
    j = np.arange(n)
    theta_m = stim.theta_amp
    # bins scale with n_periods so the record stays integer-periodic
    b1, b2 = m1 * n_periods, m2 * n_periods
    theta = theta_m * (np.sin(2 * np.pi * b1 * j / n) + np.sin(2 * np.pi * b2 * j / n))

    t_vals = np.array([drive_transmission(t, bias, mod.drive) for t in theta])
    current = link.responsivity * link.p_laser * t_vals / (
        mod.insertion_loss * link.channel_loss)

    third_null = _is_third_order_null(bias, mod.drive)
    tones = [
        (stim.f1, m1, 1),
        (stim.f2, m2, 1),
        (stim.f2 - stim.f1, m2 - m1, 2),
        (stim.f2 + stim.f1, m2 + m1, 2),
        (2 * stim.f1 - stim.f2, 2 * m1 - m2, 5 if third_null else 3),
        (2 * stim.f1 + stim.f2, 2 * m1 + m2, 3),
        (3 * stim.f1 - 2 * stim.f2, abs(3 * m1 - 2 * m2), 5),
    ]
    freqs, amps, orders = [], [], []
    for freq, m, order in tones:
        b = m * n_periods
        cosine = np.sum(current * np.cos(2 * np.pi * b * j / n)) * 2.0 / n
        sine = np.sum(current * np.sin(2 * np.pi * b * j / n)) * 2.0 / n
        freqs.append(abs(freq))
        amps.append(float(np.hypot(cosine, sine)))
        orders.append(order)
    return ToneExtraction(tuple(freqs), tuple(amps), tuple(orders))


def _is_third_order_null(bias: BiasPoint, drive: DriveTopology) -> bool:
    if not (drive.is_ramzm and bias.is_lossless):
        return False
    tau, c = bias.tau, math.cos(bias.theta_dc)
    den = (2.0 * c**2 * tau**2 + (tau**3 + tau) * c
           + 2.0 * tau**4 - 8.0 * tau**2 + 2.0)
    return abs(den) < GAMMA3_NULL_EPS


def tone_power_w(amp: float, r_load: float) -> float:
    """Average electrical power of a tone with peak current amp.

    The matched detector splits the photocurrent in half, and the mean
    power of a sinusoid is half its peak-squared: P = (amp/2)^2 R_L / 2.
    """
    return amp**2 * r_load / 8.0


def intercept_from_sweep(
    extractions: list[ToneExtraction],
    p_in: list[float],
    order: int,
    r_load: float = 50.0,
) -> float:
    """Input power where the fitted fundamental and order-n lines cross.

    Both lines are least-squares fits in log-log space. The fundamental
    slope must be 1 +/- 0.01 and the spur slope n +/- 0.05, otherwise the
    sweep is not in the small-signal regime and the caller should reduce
    the stimulus.
    """
    if len(extractions) < 4 or len(extractions) != len(p_in):
        raise ValueError("need at least 4 matched sweep points")
    x = np.log10(np.asarray(p_in, dtype=float))
    y_f = np.log10([tone_power_w(e.amplitude(1), r_load) for e in extractions])
    y_n = np.log10([tone_power_w(e.amplitude(order), r_load) for e in extractions])
    slope_f, off_f = np.polyfit(x, y_f, 1)
    slope_n, off_n = np.polyfit(x, y_n, 1)
    if abs(slope_f - 1.0) > FUND_SLOPE_TOL:
        raise NotInSmallSignalError(
            f"fundamental slope {slope_f:.4f} outside 1 +/- {FUND_SLOPE_TOL}")
    if abs(slope_n - order) > IMN_SLOPE_TOL:
        raise NotInSmallSignalError(
            f"order-{order} slope {slope_n:.4f} outside {order} +/- {IMN_SLOPE_TOL}")
    return float(10.0 ** ((off_n - off_f) / (slope_f - slope_n)))


def fit_intercept(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    order: int,
    f1: float = 0.9e9,
    f2: float = 1.0e9,
    theta_start: float = 0.2,
    n_levels: int = 5,
    samples_per_period: int = 256,
) -> float:
    """Auto-ranged intercept: walk the stimulus down until the fit is clean.

    Stimulus ranges descend by halving from theta_start (per-tone phase
    amplitude). Large ranges fail the slope windows through compression or
    higher-order contamination, tiny ones through the numeric floor under
    the spur; the accepted fit needs tight slopes and an intercept stable
    to 0.02 dB against the next smaller range, which bounds contamination
    of the fitted spur at the same level.
    """
    previous = None
    last_err = "no sweep attempted"
    theta0 = theta_start
    while theta0 > 1e-5:
        levels = np.geomspace(theta0 / 4.0, theta0, n_levels)
        extractions, powers = [], []
        for theta in levels:
            v_amp = theta * mod.v_pi / math.pi
            stim = ToneStimulus(v_amp, f1, f2, mod.v_pi)
            extractions.append(two_tone_simulate(
                stim, bias, mod, link, samples_per_period=samples_per_period))
            powers.append(stim.p_in(link.r_source))
        try:
            est = intercept_from_sweep(extractions, powers, order, link.r_load)
        except NotInSmallSignalError as err:
            last_err = str(err)
            previous = None
            theta0 /= 2.0
            continue
        x = np.log10(powers)
        y_n = np.log10([tone_power_w(e.amplitude(order), link.r_load) for e in extractions])
        slope_n = np.polyfit(x, y_n, 1)[0]
        tight = abs(slope_n - order) < 0.02
        if tight and previous is not None and abs(10.0 * math.log10(est / previous)) < 0.02:
            return est
        previous = est if tight else None
        theta0 /= 2.0
    raise NotInSmallSignalError(
        f"no stable small-signal fit for order {order} down to theta=1e-5 ({last_err})",
        suggested_v_amp=1e-5 * mod.v_pi / math.pi,
    )
