"""Two-tone intermodulation analysis: tone powers, intercepts, SFDR.

Input powers are per tone, referred to the source through the peak-voltage
mapping v_m = sqrt(2 P_in R_s). Output tone powers follow the matched
detector chain, giving

    P_fund = pi^2 r_d^2 P_I^2 R_s R_L gamma1^2 / (4 V_pi^2 L^2) * P_in
    P_im3  = 9 pi^6 r_d^2 P_I^2 R_s^3 R_L gamma3^2 / (16 V_pi^6 L^2) * P_in^3

and the second-order product has the analogous gamma2 form. Intercept
points are the crossings of these power laws and are independent of the
overall chain scale.

SFDR uses the input noise floor kT * NF * bandwidth. Each distortion
mechanism bounds the dynamic range by its own law (1/2, 2/3, 4/5 of the
intercept-to-floor distance for orders 2, 3, 5); the reported SFDR is
the smallest bound. When the cubic coefficient is exactly nulled, the
dominant remaining spur is the quintic residual at 2 f1 - f2, whose
amplitude is (25/8) |t5| theta^5; its intercept is what the fifth-order
branch fits from the two-tone engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import oracle
from .device import (
    BiasPoint,
    ModulatorSpec,
    TaylorCoefficients,
    drive_quintic_coefficient,
    drive_taylor_coefficients,
)
from .link import (
    LimitingOrder,
    LinkMetrics,
    LinkParams,
    Matching,
    avg_photocurrent,
    densities_from_current,
    gain_from_slope,
    link_gain,
    noise_figure,
    noise_figure_from_parts,
    output_noise_density,
    photocurrent_from_gamma0,
    slope_efficiency,
    slope_efficiency_from_gamma1,
)
from .oracle import ToneStimulus

# Denominator of the closed-form IIP3 below this magnitude counts as a
# third-order null; avoids astronomically large but meaningless intercepts.
EPS_GAMMA3_DEN = 1e-9
# cos(phi_bias) floor distinguishing a true even-order null from float noise
# in tan^2 at quadrature.
EPS_GAMMA2 = 1e-12

IM3_RESIDUAL_QUINTIC = 25.0 / 8.0  # 2f1-f2 spur amplitude per |t5| theta^5
IM5_QUINTIC = 5.0 / 8.0            # 3f1-2f2 spur amplitude per |t5| theta^5


@dataclass(frozen=True)
class SfdrResult:
    sfdr_db: float
    limiting_order: LimitingOrder


def _loss_total(mod: ModulatorSpec, link: LinkParams) -> float:
    return mod.insertion_loss * link.channel_loss


def tone_powers(
    stim: ToneStimulus,
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
) -> dict[str, float]:
    """Electrical output powers of the fundamental, IM2, and IM3 tones."""
    g = drive_taylor_coefficients(bias, mod.drive)
    p_in = stim.p_in(link.r_source)
    r_d, r_s, r_l = link.responsivity, link.r_source, link.r_load
    p_i, v_pi = link.p_laser, mod.v_pi
    loss = _loss_total(mod, link)
    common = r_d**2 * p_i**2 * r_l / loss**2
    p_fund = math.pi**2 * common * r_s * g.gamma1**2 / (4.0 * v_pi**2) * p_in
    p_im2 = math.pi**4 * common * r_s**2 * g.gamma2**2 / (2.0 * v_pi**4) * p_in**2
    p_im3 = 9.0 * math.pi**6 * common * r_s**3 * g.gamma3**2 / (16.0 * v_pi**6) * p_in**3
    return {"p_fund": p_fund, "p_im2": p_im2, "p_im3": p_im3}


def iip3(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Input-referred third-order intercept [W]; +inf at the cubic null.

    For the RAMZM this is the closed form
        IIP3 = 2 V_pi^2 [tau^2 - 2 cos(th_DC) tau + 1]^2
               / (pi^2 R_s |2 cos^2 tau^2 + (tau^3+tau) cos + 2 tau^4 - 8 tau^2 + 2|)
    whose denominator is proportional to gamma3; MZM drives use the
    equivalent coefficient-ratio form. Independent of phi_bias.
    """
    if mod.drive.is_ramzm:
        tau = bias.tau
        c = math.cos(bias.theta_dc)
        den = (2.0 * c**2 * tau**2 + (tau**3 + tau) * c
               + 2.0 * tau**4 - 8.0 * tau**2 + 2.0)
        if abs(den) < EPS_GAMMA3_DEN:
            return math.inf
        d = tau**2 - 2.0 * tau * c + 1.0
        return 2.0 * mod.v_pi**2 * d**2 / (math.pi**2 * link.r_source * abs(den))
    g = drive_taylor_coefficients(bias, mod.drive)
    if abs(g.gamma3) < EPS_GAMMA3_DEN * abs(g.gamma1):
        return math.inf
    return (2.0 / 3.0) * abs(g.gamma1 / g.gamma3) * mod.v_pi**2 / (
        math.pi**2 * link.r_source)


def iip2(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Input-referred second-order intercept [W]; +inf at quadrature.

    RAMZM closed form
        IIP2 = V_pi^2 [tau^2 - 2 cos(th_DC) tau + 1]^2 tan^2(phi_bias)
               / (2 pi^2 R_s (tau^2 - 1)^2)
    evaluated through the coefficient ratio so that quadrature maps to a
    clean infinity instead of the float residue of tan(pi/2).
    """
    g = drive_taylor_coefficients(bias, mod.drive)
    if abs(g.gamma2) < EPS_GAMMA2:
        return math.inf
    return g.gamma1**2 * mod.v_pi**2 / (
        2.0 * math.pi**2 * link.r_source * g.gamma2**2)


def iip5_analytic(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Fifth-order intercept from the quintic series coefficient [W].

    Uses the dominant residual spur at 2 f1 - f2, amplitude
    (25/8) |t5| theta^5 against the fundamental |gamma1| theta. Requires
    alpha = 1 (no closed quintic form for lossy rings).
    """
    g1 = drive_taylor_coefficients(bias, mod.drive).gamma1
    t5 = drive_quintic_coefficient(bias, mod.drive)
    if t5 == 0.0 or g1 == 0.0:
        return math.inf
    theta4 = abs(g1) / (IM3_RESIDUAL_QUINTIC * abs(t5))
    v_m = theta4**0.25 * mod.v_pi / math.pi
    return v_m**2 / (2.0 * link.r_source)


def iip5_oracle(bias: BiasPoint, mod: ModulatorSpec, link: LinkParams) -> float:
    """Fifth-order intercept fitted from two-tone simulations [W]."""
    return oracle.fit_intercept(bias, mod, link, order=5)


def input_noise_floor_dbm(nf_db: float, link: LinkParams) -> float:
    """Input-referred noise floor kT NF Delta-f in dBm."""
    kt_dbm_hz = 10.0 * math.log10(link.kt / 1e-3)
    return kt_dbm_hz + nf_db + 10.0 * math.log10(link.bandwidth_hz)


def _w_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3) if p_w > 0 else -math.inf


def _sfdr_order(iip_w: float, order: int, floor_dbm: float) -> float:
    """Dynamic-range bound from one intercept: (n-1)/n of the headroom."""
    if math.isinf(iip_w):
        return math.inf
    return (order - 1) / order * (_w_to_dbm(iip_w) - floor_dbm)


def sfdr(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
    *,
    use_oracle_at_null: bool = True,
) -> SfdrResult:
    """Spur-free dynamic range, limited by the strongest spur mechanism.

    Second- and third-order bounds come from the closed-form intercepts.
    The fifth-order bound uses the quintic series coefficient; exactly at
    a third-order null it is instead fitted from the two-tone engine
    (use_oracle_at_null=False keeps the analytic path, e.g. inside
    sweeps). The result is in dB at the configured bandwidth, i.e.
    dB-Hz^(2/3)-style referred to 1 Hz when bandwidth_hz = 1.
    """
    nf = noise_figure(bias, mod, link, matching)
    if math.isinf(nf):
        return SfdrResult(-math.inf, LimitingOrder.THIRD)
    floor = input_noise_floor_dbm(nf, link)

    i3 = iip3(bias, mod, link)
    s3 = _sfdr_order(i3, 3, floor)
    s2 = _sfdr_order(iip2(bias, mod, link), 2, floor)
    if math.isinf(i3) and use_oracle_at_null:
        i5 = iip5_oracle(bias, mod, link)
    elif bias.is_lossless or not mod.drive.is_ramzm:
        i5 = iip5_analytic(bias, mod, link)
    else:
        i5 = math.inf  # lossy off-null: third order dominates anyway
    s5 = _sfdr_order(i5, 5, floor)

    bounds = [(s2, LimitingOrder.SECOND), (s3, LimitingOrder.THIRD),
              (s5, LimitingOrder.FIFTH)]
    best = min(bounds, key=lambda b: b[0])
    return SfdrResult(best[0], best[1])


def sfdr_third_order_db(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
) -> float:
    """Intercept-limited SFDR ignoring the fifth-order mechanism [dB].

    This is the quantity mapped in the bias-plane contour figures: the
    min of the second- and third-order bounds, +inf where both intercepts
    are infinite (the exact linearized points) and -inf where the link
    has no gain. The finite fifth-order value at the nulls comes from
    sfdr().
    """
    nf = noise_figure(bias, mod, link, matching)
    if math.isinf(nf):
        return -math.inf
    floor = input_noise_floor_dbm(nf, link)
    s3 = _sfdr_order(iip3(bias, mod, link), 3, floor)
    s2 = _sfdr_order(iip2(bias, mod, link), 2, floor)
    return min(s2, s3)


def compute_link_metrics(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
) -> LinkMetrics:
    """Assemble the full metric record for one operating point."""
    res = sfdr(bias, mod, link, matching)
    return LinkMetrics(
        slope_efficiency=slope_efficiency(bias, mod, link),
        gain_linear=link_gain(bias, mod, link),
        avg_photocurrent=avg_photocurrent(bias, mod, link),
        noise_out_w_per_hz=output_noise_density(bias, mod, link),
        nf_db=noise_figure(bias, mod, link, matching),
        iip3_w=iip3(bias, mod, link),
        iip2_w=iip2(bias, mod, link),
        sfdr_db=res.sfdr_db,
        limiting_order=res.limiting_order,
    )


def numeric_link_metrics(
    bias: BiasPoint,
    mod: ModulatorSpec,
    link: LinkParams,
    matching: Matching = Matching.LOSSY_MATCH,
    fd_step: float = 1e-3,
) -> LinkMetrics:
    """Metrics via finite-difference coefficients of the exact transmission.

    The route for lossy rings (alpha < 1), where the closed forms do not
    apply. Intercepts come from the coefficient ratios; no quintic bound
    is available, so the SFDR is intercept-limited second/third order.
    For lossless rings this agrees with compute_link_metrics wherever the
    fifth-order mechanism is not the binding one.
    """
    coeffs = oracle.finite_diff_coeffs(bias, order=4, h=fd_step)
    s = slope_efficiency_from_gamma1(coeffs.gamma1, mod, link)
    g = gain_from_slope(s, link)
    i_d = photocurrent_from_gamma0(coeffs.gamma0, mod, link)
    dens = densities_from_current(i_d, mod, link)
    nf = noise_figure_from_parts(g, dens, link, matching)
    n_out = 0.25 * (dens.rin_a2_hz + dens.shot_a2_hz) * link.r_load + (1.0 + g) * link.kt

    i3 = _iip3_from_coeffs(coeffs, mod, link)
    i2 = _iip2_from_coeffs(coeffs, mod, link)
    if math.isinf(nf):
        sfdr_db, order = -math.inf, LimitingOrder.THIRD
    else:
        floor = input_noise_floor_dbm(nf, link)
        bounds = [(_sfdr_order(i2, 2, floor), LimitingOrder.SECOND),
                  (_sfdr_order(i3, 3, floor), LimitingOrder.THIRD)]
        sfdr_db, order = min(bounds, key=lambda b: b[0])
    return LinkMetrics(
        slope_efficiency=s,
        gain_linear=g,
        avg_photocurrent=i_d,
        noise_out_w_per_hz=n_out,
        nf_db=nf,
        iip3_w=i3,
        iip2_w=i2,
        sfdr_db=sfdr_db,
        limiting_order=order,
    )


def _iip3_from_coeffs(coeffs: TaylorCoefficients, mod: ModulatorSpec,
                      link: LinkParams) -> float:
    if abs(coeffs.gamma3) < EPS_GAMMA3_DEN * max(abs(coeffs.gamma1), 1e-6):
        return math.inf
    return (2.0 / 3.0) * abs(coeffs.gamma1 / coeffs.gamma3) * mod.v_pi**2 / (
        math.pi**2 * link.r_source)


def _iip2_from_coeffs(coeffs: TaylorCoefficients, mod: ModulatorSpec,
                      link: LinkParams) -> float:
    if abs(coeffs.gamma2) < EPS_GAMMA2:
        return math.inf
    return coeffs.gamma1**2 * mod.v_pi**2 / (
        2.0 * math.pi**2 * link.r_source * coeffs.gamma2**2)
