"""RF photonic link modeling for ring-assisted Mach-Zehnder modulators.

Core layers:
  device     -- exact optical transfer functions and their Taylor expansions
  link       -- gain, photocurrent, noise densities, noise figure
  distortion -- intermod powers, IIP2/IIP3, spur-free dynamic range
  oracle     -- finite-difference and two-tone brute-force verification
  sweep      -- parameter grids, bias optimization, null-bias analysis
  config/cli -- JSON configuration and the command-line front end
"""

__version__ = "0.1.0"

from .device import (
    BiasPoint,
    DriveTopology,
    ModulatorSpec,
    TaylorCoefficients,
    mzm_transmission,
    output_field,
    quintic_coefficient,
    ring_phase,
    ring_response,
    taylor_coefficients,
    transmission,
)
from .distortion import (
    SfdrResult,
    compute_link_metrics,
    iip2,
    iip3,
    numeric_link_metrics,
    sfdr,
    sfdr_third_order_db,
    tone_powers,
)
from .errors import (
    AliasError,
    AlphaNotUnityError,
    ConfigError,
    InfeasibleError,
    NotInSmallSignalError,
    RinglinkError,
    StepTooSmallError,
)
from .link import (
    LimitingOrder,
    LinkMetrics,
    LinkParams,
    Matching,
    NoiseDensities,
    avg_photocurrent,
    link_gain,
    lumped_reflection,
    noise_densities,
    noise_figure,
    slope_efficiency,
)
from .oracle import (
    ToneExtraction,
    ToneStimulus,
    finite_diff_coeffs,
    fit_intercept,
    intercept_from_sweep,
    two_tone_simulate,
)
from .sweep import (
    AxisSpec,
    Objective,
    OptimizeConstraints,
    SweepGrid,
    SweepSpec,
    null_bias_analysis,
    optimize_bias,
    run_sweep,
)

__all__ = [
    "AliasError", "AlphaNotUnityError", "AxisSpec", "BiasPoint", "ConfigError",
    "DriveTopology", "InfeasibleError", "LimitingOrder", "LinkMetrics",
    "LinkParams", "Matching", "ModulatorSpec", "NoiseDensities",
    "NotInSmallSignalError", "Objective", "OptimizeConstraints", "RinglinkError",
    "SfdrResult", "StepTooSmallError", "SweepGrid", "SweepSpec",
    "TaylorCoefficients", "ToneExtraction", "ToneStimulus", "avg_photocurrent",
    "compute_link_metrics", "finite_diff_coeffs", "fit_intercept", "iip2", "iip3",
    "intercept_from_sweep", "link_gain", "lumped_reflection", "mzm_transmission",
    "noise_densities", "noise_figure", "null_bias_analysis", "numeric_link_metrics",
    "optimize_bias", "output_field", "quintic_coefficient", "ring_phase",
    "ring_response", "run_sweep", "sfdr", "sfdr_third_order_db",
    "slope_efficiency", "taylor_coefficients", "tone_powers", "transmission",
    "two_tone_simulate",
]
