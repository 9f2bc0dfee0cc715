"""Small-signal gain, photocurrent, noise, and noise figure of the link.

The link is laser -> modulator -> passive optical channel -> photodiode
into a resistively matched load. Detected RF power goes as the square of
optical power, so the channel's power loss enters the link gain squared:

    G = G_M * G_ch^2 * G_det,   G_ch = 1/L_ch,   G_det = r_d^2 R_L

Gain convention: the modulator available gain is taken as
G_M = (2 s)^2 / R_s with s the slope efficiency below. The factor 2 on the
drive voltage (v_m = 2 sqrt(P_s,a R_s)) is the convention under which the
noise-figure and SFDR figures of this model reproduce their reference
values; the two-tone distortion powers use the peak-voltage mapping
v_m = sqrt(2 P_in R_s) instead (see the distortion module). The two
bookkeepings differ by a fixed 12 dB and are kept as-is deliberately;
intercept points and SFDR are invariant to the common scale.

All inputs are linear SI (watts, volts, ohms, amps); only outputs that are
conventionally logarithmic (NF) are in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .device import BiasPoint, DriveTopology, ModulatorSpec, drive_taylor_coefficients

# exact SI values
Q_ELECTRON = 1.602176634e-19   # C
K_BOLTZMANN = 1.380649e-23     # J/K


class Matching(Enum):
    """Detector-to-load matching scheme used in the noise figure."""

    LOSSY_MATCH = "lossy-match"
    TRANSFORMER = "transformer"


class LimitingOrder(Enum):
    """Distortion order that bounds the spur-free dynamic range."""

    SECOND = 2
    THIRD = 3
    FIFTH = 5


@dataclass(frozen=True)
class LinkParams:
    """End-to-end link constants.

    p_laser        : CW laser power into the modulator [W].
    rin_db_hz      : laser relative intensity noise [dB/Hz], negative.
    r_source       : RF source impedance [ohm].
    r_load         : detector load impedance [ohm].
    responsivity   : photodiode responsivity [A/W].
    channel_loss   : optical channel power loss, linear ratio >= 1.
    bandwidth_hz   : noise/SFDR bandwidth [Hz].
    temperature_k  : noise temperature [K]; 290 K is the RF convention.
    transformer_turns : turn ratio for transformer matching, if used.
    pd_sat_current : photodiode saturation current [A].
    """

    p_laser: float
    rin_db_hz: float = -145.0
    r_source: float = 50.0
    r_load: float = 50.0
    responsivity: float = 1.1
    channel_loss: float = 1.0
    bandwidth_hz: float = 1.0
    temperature_k: float = 290.0
    transformer_turns: float | None = None
    pd_sat_current: float = 15.5e-3

    def __post_init__(self):
        for name in ("p_laser", "r_source", "r_load", "responsivity",
                     "bandwidth_hz", "temperature_k", "pd_sat_current"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.channel_loss < 1.0:
            raise ValueError("channel_loss is a linear power ratio >= 1")
        if self.rin_db_hz >= 0:
            raise ValueError("rin_db_hz must be negative")

    @property
    def kt(self) -> float:
        """Thermal noise density kT [W/Hz]."""
        return K_BOLTZMANN * self.temperature_k


@dataclass(frozen=True)
class NoiseDensities:
    """Per-mechanism noise spectral densities at the stated photocurrent."""

    rin_a2_hz: float            # RIN current density [A^2/Hz]
    shot_a2_hz: float           # shot-noise current density [A^2/Hz]
    thermal_load_w_hz: float    # load resistor thermal density kT [W/Hz]
    modulator_input_w_hz: float  # electrode kT/C noise as input density [W/Hz]
    modulator_bandwidth_hz: float  # band over which the electrode noise acts


@dataclass(frozen=True)
class LinkMetrics:
    """Derived link figures at one operating point."""

    slope_efficiency: float      # [W/V]
    gain_linear: float           # available power gain, dimensionless
    avg_photocurrent: float      # [A]
    noise_out_w_per_hz: float    # total output noise density [W/Hz]
    nf_db: float                 # noise figure [dB]
    iip3_w: float                # input-referred 3rd-order intercept [W], may be inf
    iip2_w: float                # input-referred 2nd-order intercept [W], may be inf
    sfdr_db: float               # spur-free dynamic range at bandwidth_hz [dB]
    limiting_order: LimitingOrder

    @property
    def gain_db(self) -> float:
        return 10.0 * math.log10(self.gain_linear) if self.gain_linear > 0 else -math.inf

    def oip3_w(self) -> float:
        """Output-referred 3rd-order intercept."""
        return self.iip3_w * self.gain_linear

    def oip2_w(self) -> float:
        return self.iip2_w * self.gain_linear


def slope_efficiency_from_gamma1(gamma1: float, mod: ModulatorSpec, link: LinkParams) -> float:
    """Slope efficiency s = pi |gamma1| P_I R_s / (V_pi L) for a given gamma1."""
    factor = 2.0 if mod.drive is DriveTopology.RAMZM_LUMPED else 1.0
    return (factor * math.pi * abs(gamma1) * link.p_laser * link.r_source
            / (mod.v_pi * mod.insertion_loss))


def slope_efficiency(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Modulator slope efficiency s = pi |gamma1| P_I R_s / (V_pi L).

    |gamma1| is 1/2 and 1 for single and push-pull MZMs at quadrature,
    reproducing s = pi P_I R_s / (2 V_pi L) and pi P_I R_s / (V_pi L).
    A lumped capacitive drive doubles the voltage reaching the electrodes
    at low frequency and with it the slope efficiency.
    """
    g1 = drive_taylor_coefficients(bias, mod.drive).gamma1
    return slope_efficiency_from_gamma1(g1, mod, link)


def gain_from_slope(s: float, link: LinkParams) -> float:
    """Link gain for a given slope efficiency (see module gain convention)."""
    g_mod = 4.0 * s**2 / link.r_source
    g_ch = 1.0 / link.channel_loss
    g_det = link.responsivity**2 * link.r_load
    return g_mod * g_ch**2 * g_det


def link_gain(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """End-to-end available power gain G = (2s)^2/R_s * G_ch^2 * r_d^2 R_L."""
    return gain_from_slope(slope_efficiency(bias, mod, link), link)


def photocurrent_from_gamma0(gamma0: float, mod: ModulatorSpec, link: LinkParams) -> float:
    """DC detector current r_d P_I gamma0 / (2 L L_ch) for a given gamma0."""
    p_av = link.p_laser * gamma0 / (2.0 * mod.insertion_loss * link.channel_loss)
    return link.responsivity * p_av


def avg_photocurrent(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """DC detector current I_D = r_d P_I (1 + cos phi_bias) / (2 L L_ch)."""
    return photocurrent_from_gamma0(1.0 + math.cos(bias.phi_bias), mod, link)


def iso_current_arm_bias(target_current: float, mod: ModulatorSpec, link: LinkParams) -> float:
    """Arm bias holding the photocurrent at target_current, or NaN.

    Closed-form inversion of avg_photocurrent in phi_bias, clamped to
    [0, pi]. Returns NaN when the laser power cannot reach the target
    current even at phi_bias = 0.
    """
    arg = 2.0 * mod.insertion_loss * link.channel_loss * target_current / (
        link.responsivity * link.p_laser) - 1.0
    if arg > 1.0:
        return math.nan
    return math.acos(max(arg, -1.0))


def densities_from_current(i_d: float, mod: ModulatorSpec, link: LinkParams) -> NoiseDensities:
    """Noise densities at a given DC photocurrent."""
    rin = 0.5 * i_d**2 * 10.0 ** (link.rin_db_hz / 10.0)
    shot = 2.0 * Q_ELECTRON * i_d
    bw_mod = 1.0 / (math.pi * (link.r_source + 2.0 * mod.electrode_r) * mod.electrode_c)
    return NoiseDensities(
        rin_a2_hz=rin,
        shot_a2_hz=shot,
        thermal_load_w_hz=link.kt,
        modulator_input_w_hz=link.kt,
        modulator_bandwidth_hz=bw_mod,
    )


def noise_densities(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> NoiseDensities:
    """Noise spectral densities of the link's mechanisms.

    RIN scales with the photocurrent squared, shot noise linearly; both
    vanish under null bias. The electrode kT/C noise is equivalent to an
    input noise density kT acting over 1/(pi (R_s + 2 r_M) C_M).
    """
    return densities_from_current(avg_photocurrent(bias, mod, link), mod, link)


def output_noise_density(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Total output noise density N_out [W/Hz] into the matched load."""
    dens = noise_densities(bias, mod, link)
    g = link_gain(bias, mod, link)
    return 0.25 * (dens.rin_a2_hz + dens.shot_a2_hz) * link.r_load + (1.0 + g) * link.kt


def noise_figure(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
    *,
    include_detector_noise: bool = True,
    include_modulator_noise: bool = False,
) -> float:
    """Link noise figure [dB].

    Lossy match:   NF = 10 log10[1 + R_L (rin + shot) / (4 kT G) + 1/G]
    Transformer:   NF = 10 log10[1 + N_D^2 R_s (rin + shot) / (kT G) + 1/G]

    Returns +inf when the link gain is zero (e.g. gamma1 = 0 at
    phi_bias = 0 or pi) so bias sweeps stay total. include_detector_noise
    exists for limit checks; include_modulator_noise adds the electrode
    kT/C term as a flat kT input density within its own bandwidth (off by
    default: the reference noise-figure expression carries only RIN, shot,
    and load terms).
    """
    return noise_figure_from_parts(
        link_gain(bias, mod, link),
        noise_densities(bias, mod, link) if include_detector_noise else None,
        link,
        matching,
        include_modulator_noise=include_modulator_noise,
    )


def noise_figure_from_parts(
    gain: float,
    densities: NoiseDensities | None,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
    *,
    include_modulator_noise: bool = False,
) -> float:
    """Noise figure from a precomputed gain and noise densities.

    densities=None drops the detector (RIN + shot) terms entirely,
    leaving the passive 10 log10(1 + 1/G) limit.
    """
    if gain == 0.0:
        return math.inf
    bracket = 1.0 + 1.0 / gain
    if densities is not None:
        detector = densities.rin_a2_hz + densities.shot_a2_hz
        if matching is Matching.LOSSY_MATCH:
            bracket += link.r_load * detector / (4.0 * link.kt * gain)
        elif matching is Matching.TRANSFORMER:
            if link.transformer_turns is None:
                raise ValueError("transformer matching requires transformer_turns")
            n_d = link.transformer_turns
            bracket += n_d**2 * link.r_source * detector / (link.kt * gain)
        else:  # pragma: no cover
            raise ValueError(f"unknown matching {matching}")
    if include_modulator_noise:
        bracket += 1.0
    return 10.0 * math.log10(bracket)


def lumped_reflection(mod: ModulatorSpec, z0: float, omega: float) -> tuple[float, float]:
    """Reflection magnitude and voltage gain of a lumped capacitive drive.

    Gamma_m = (Z_m - Z_0)/(Z_m + Z_0) with Z_m = r_M + 1/(j w C_M); the
    standing wave raises the electrode voltage by 1 + |Gamma_m|, between
    1 (matched) and 2 (open, the low-frequency limit).
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    z_m = mod.electrode_r + 1.0 / (1j * omega * mod.electrode_c)
    gamma = (z_m - z0) / (z_m + z0)
    mag = abs(gamma)
    return mag, 1.0 + mag
