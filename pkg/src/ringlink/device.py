"""Optical transfer functions for ring-assisted Mach-Zehnder modulators.

A RAMZM is a Mach-Zehnder interferometer whose arm phase shifters are
replaced by all-pass microring resonators. Each ring is described by its
coupler transmission coefficient tau = sqrt(1 - kappa^2) and round-trip
amplitude loss factor alpha, with complex response

    a(theta) = (tau - alpha e^{-j theta}) / (1 - tau alpha e^{-j theta})

For alpha = 1 the ring is all-pass (|a| = 1) and only its phase matters.
The two rings are driven differentially around a common DC phase theta_DC,
and the interferometer carries a static arm bias phi_bias.

Sign convention used throughout: the ring on the arm carrying phi_bias is
driven at theta_DC - theta_mod, its partner at theta_DC + theta_mod. This
polarity makes the small-signal (linear) coefficient of the transmission
positive for phi_bias in (0, pi), i.e. gamma1 = (1 - tau)/(1 + tau) at the
anti-resonance bias and gamma1 = (1 + tau)/(1 - tau) at resonance with
tau = 1/2 giving 1/3 and 3. The opposite polarity flips the sign of the
odd-order coefficients only; all power-level quantities are unaffected.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import AlphaNotUnityError

ALPHA_LOSSLESS_TOL = 1e-12


class DriveTopology(Enum):
    """Electrical drive / modulator family."""

    RAMZM_MATCHED = "ramzm-matched"
    RAMZM_LUMPED = "ramzm-lumped"
    MZM_SINGLE = "mzm-single"
    MZM_PUSH_PULL = "mzm-push-pull"

    @property
    def is_ramzm(self) -> bool:
        return self in (DriveTopology.RAMZM_MATCHED, DriveTopology.RAMZM_LUMPED)


@dataclass(frozen=True)
class BiasPoint:
    """Optical operating point of a RAMZM.

    phi_bias : MZ arm bias [rad]; quadrature is pi/2, null is pi.
    theta_dc : ring round-trip DC phase [rad]; anti-resonance is pi.
    tau      : coupler transmission coefficient, 0 <= tau < 1.
    alpha    : ring round-trip amplitude loss factor, 0 < alpha <= 1.
    psi_path : arm path-length phase mismatch [rad], 0 for equal arms.
    """

    phi_bias: float
    theta_dc: float
    tau: float
    alpha: float = 1.0
    psi_path: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.tau < 1.0):
            raise ValueError(f"tau must be in [0, 1), got {self.tau}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        for name in ("phi_bias", "theta_dc", "psi_path"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def kappa(self) -> float:
        """Coupler cross-coupling coefficient kappa = sqrt(1 - tau^2)."""
        return math.sqrt(1.0 - self.tau**2)

    @property
    def is_lossless(self) -> bool:
        return abs(self.alpha - 1.0) <= ALPHA_LOSSLESS_TOL


@dataclass(frozen=True)
class ModulatorSpec:
    """Device constants of the modulator.

    v_pi           : drive voltage for a pi phase shift [V].
    insertion_loss : optical power loss, linear ratio >= 1.
    electrode_r    : electrode series resistance [ohm].
    electrode_c    : electrode capacitance [F].
    drive          : drive topology / modulator family.
    """

    v_pi: float
    insertion_loss: float
    electrode_r: float
    electrode_c: float
    drive: DriveTopology = DriveTopology.RAMZM_MATCHED

    def __post_init__(self):
        if self.v_pi <= 0:
            raise ValueError("v_pi must be positive")
        if self.insertion_loss < 1.0:
            raise ValueError("insertion_loss is a linear power ratio >= 1")
        if self.electrode_r < 0:
            raise ValueError("electrode_r must be nonnegative")
        if self.electrode_c <= 0:
            raise ValueError("electrode_c must be positive")


@dataclass(frozen=True)
class TaylorCoefficients:
    """Coefficients of the transmission expansion around the bias point.

    The optical power follows
        P(theta_mod) = P_I [gamma0/2 - gamma1 th - gamma2 th^2
                            + gamma3 th^3 + gamma4 th^4] + O(th^5)
    """

    gamma0: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.gamma0, self.gamma1, self.gamma2, self.gamma3, self.gamma4)


def ring_response(theta: float, bias: BiasPoint) -> complex:
    """Complex all-pass response a(theta) of one microring."""
    z = bias.alpha * cmath.exp(-1j * theta)
    return (bias.tau - z) / (1.0 - bias.tau * z)


def ring_phase(theta: float, bias: BiasPoint) -> float:
    """Phase of ring_response via the quadrant-aware arctangent.

    The single-argument arctangent form loses the branch: at theta = 0 with
    alpha = 1 the response is real negative and the phase is pi, not 0.
    atan2 of the (numerator x conjugate denominator) components returns the
    exact argument of ring_response.
    """
    tau, alpha = bias.tau, bias.alpha
    num = alpha * (1.0 - tau**2) * math.sin(theta)
    den = tau * (1.0 + alpha**2) - alpha * (1.0 + tau**2) * math.cos(theta)
    return math.atan2(num, den)


def output_field(theta_mod: float, bias: BiasPoint, e_in: complex = 1.0) -> complex:
    """Superposed output field of the interferometer.

    The bias arm (carrying phi_bias) has its ring at theta_DC - theta_mod,
    the partner arm (carrying psi_path) at theta_DC + theta_mod. Ring
    magnitude responses are included, so the result is valid for lossy
    rings (alpha < 1).
    """
    a_bias = ring_response(bias.theta_dc - theta_mod, bias)
    a_partner = ring_response(bias.theta_dc + theta_mod, bias)
    term_bias = a_bias.conjugate() * cmath.exp(-1j * bias.phi_bias)
    term_partner = a_partner.conjugate() * cmath.exp(-1j * bias.psi_path)
    return 0.5 * e_in * (term_bias + term_partner)


def transmission(theta_mod: float, bias: BiasPoint) -> float:
    """Optical power transmission T(theta_mod) in [0, 1].

    Equal-arm lossless rings use the closed form
        T = (1 + cos(phi_bias + phi_A - phi_B)) / 2
    with phi_A/phi_B the ring phases of the two arms; any loss or path
    mismatch falls back to |output_field|^2.
    """
    if bias.is_lossless and bias.psi_path == 0.0:
        phi_a = ring_phase(bias.theta_dc - theta_mod, bias)
        phi_b = ring_phase(bias.theta_dc + theta_mod, bias)
        return 0.5 * (1.0 + math.cos(bias.phi_bias + phi_a - phi_b))
    return abs(output_field(theta_mod, bias)) ** 2


def mzm_transmission(theta_mod: float, phi_bias: float, drive: DriveTopology) -> float:
    """Reference MZM transmission: raised cosine in the drive phase.

    Single drive modulates one arm (argument theta_mod), push-pull drives
    both arms differentially (argument 2 theta_mod), which doubles the
    slope at quadrature.
    """
    if drive is DriveTopology.MZM_SINGLE:
        return 0.5 * (1.0 + math.cos(phi_bias + theta_mod))
    if drive is DriveTopology.MZM_PUSH_PULL:
        return 0.5 * (1.0 + math.cos(phi_bias + 2.0 * theta_mod))
    raise ValueError(f"not an MZM drive: {drive}")


def taylor_coefficients(bias: BiasPoint) -> TaylorCoefficients:
    """Closed-form gamma0..gamma4 of the RAMZM transmission.

    Defined only for lossless rings; the expansion does not hold for
    alpha < 1, where callers should differentiate the exact transmission
    numerically (see the oracle module).
    """
    if not bias.is_lossless:
        raise AlphaNotUnityError(
            f"closed-form coefficients require alpha = 1 (got {bias.alpha}); "
            "use oracle.finite_diff_coeffs for lossy rings"
        )
    tau = bias.tau
    c = math.cos(bias.theta_dc)
    s_b = math.sin(bias.phi_bias)
    c_b = math.cos(bias.phi_bias)
    d = tau**2 - 2.0 * tau * c + 1.0
    p3 = 2.0 * c**2 * tau**2 + c * tau**3 + 2.0 * tau**4 + c * tau - 8.0 * tau**2 + 2.0
    p4 = 4.0 * c**2 * tau**2 + 2.0 * c * tau**3 + tau**4 + 2.0 * c * tau - 10.0 * tau**2 + 1.0
    return TaylorCoefficients(
        gamma0=1.0 + c_b,
        gamma1=(1.0 - tau**2) * s_b / d,
        gamma2=(tau**2 - 1.0) ** 2 * c_b / d**2,
        gamma3=(1.0 - tau**2) * p3 * s_b / (3.0 * d**3),
        gamma4=(tau**2 - 1.0) ** 2 * p4 * c_b / (3.0 * d**4),
    )


def mzm_taylor_coefficients(phi_bias: float, drive: DriveTopology) -> TaylorCoefficients:
    """gamma0..gamma4 of a reference MZM, same expansion convention."""
    s_b = math.sin(phi_bias)
    c_b = math.cos(phi_bias)
    if drive is DriveTopology.MZM_SINGLE:
        m = 1.0
    elif drive is DriveTopology.MZM_PUSH_PULL:
        m = 2.0
    else:
        raise ValueError(f"not an MZM drive: {drive}")
    # T = (1 + cos(phi + m*th))/2; k-th theta coefficient scales as m^k
    return TaylorCoefficients(
        gamma0=1.0 + c_b,
        gamma1=m * s_b / 2.0,
        gamma2=m**2 * c_b / 4.0,
        gamma3=m**3 * s_b / 12.0,
        gamma4=m**4 * c_b / 48.0,
    )


def drive_taylor_coefficients(bias: BiasPoint, drive: DriveTopology) -> TaylorCoefficients:
    """Taylor coefficients of whichever modulator family is configured."""
    if drive.is_ramzm:
        return taylor_coefficients(bias)
    return mzm_taylor_coefficients(bias.phi_bias, drive)


def _phase_derivatives(theta_dc: float, tau: float) -> tuple[float, float, float]:
    """First, third, and fifth derivatives of the all-pass ring phase.

    For alpha = 1 the phase derivative has the compact form
        phi'(theta) = -(1 - tau^2) / (tau^2 - 2 tau cos(theta) + 1)
    and higher derivatives follow by differentiating 1/D.
    """
    c = math.cos(theta_dc)
    sn = math.sin(theta_dc)
    d = tau**2 - 2.0 * tau * c + 1.0
    d1 = 2.0 * tau * sn
    d2 = 2.0 * tau * c
    d3 = -d1
    d4 = -d2
    one = 1.0 - tau**2
    p1 = -one / d
    p3 = one * (d2 * d - 2.0 * d1**2) / d**3
    p5 = one * (
        d4 * d**3 - 8.0 * d3 * d1 * d**2 - 6.0 * d2**2 * d**2
        + 36.0 * d2 * d1**2 * d - 24.0 * d1**4
    ) / d**5
    return p1, p3, p5


def quintic_coefficient(bias: BiasPoint) -> float:
    """theta^5 coefficient of the RAMZM transmission series.

    First term beyond TaylorCoefficients; governs the residual distortion
    when the cubic coefficient is nulled. Derived from the phase
    derivatives of the all-pass response: with Delta(th) the (odd) phase
    difference between the two arms,
        t5 = -sin(phi_bias)/2 * [Delta]_5 of sin(Delta).
    Lossless rings only.
    """
    if not bias.is_lossless:
        raise AlphaNotUnityError("quintic coefficient requires alpha = 1")
    p1, p3, p5 = _phase_derivatives(bias.theta_dc, bias.tau)
    a1 = -2.0 * p1
    a3 = -p3 / 3.0
    a5 = -p5 / 60.0
    return -math.sin(bias.phi_bias) / 2.0 * (a5 - a1**2 * a3 / 2.0 + a1**5 / 120.0)


def mzm_quintic_coefficient(phi_bias: float, drive: DriveTopology) -> float:
    """theta^5 coefficient of the reference MZM transmission series."""
    if drive is DriveTopology.MZM_SINGLE:
        m = 1.0
    elif drive is DriveTopology.MZM_PUSH_PULL:
        m = 2.0
    else:
        raise ValueError(f"not an MZM drive: {drive}")
    return -(m**5) * math.sin(phi_bias) / 240.0


def drive_quintic_coefficient(bias: BiasPoint, drive: DriveTopology) -> float:
    if drive.is_ramzm:
        return quintic_coefficient(bias)
    return mzm_quintic_coefficient(bias.phi_bias, drive)


def drive_transmission(theta_mod: float, bias: BiasPoint, drive: DriveTopology) -> float:
    """Exact transmission of whichever modulator family is configured."""
    if drive.is_ramzm:
        return transmission(theta_mod, bias)
    return mzm_transmission(theta_mod, bias.phi_bias, drive)
