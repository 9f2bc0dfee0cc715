"""Exception types shared across the package."""


class RinglinkError(Exception):
    """Base class for all ringlink errors."""


class AlphaNotUnityError(RinglinkError):
    """Closed-form Taylor coefficients require a lossless ring (alpha = 1).

    Lossy rings have no closed-form expansion here; evaluate the exact
    transmission through the numeric oracle instead.
    """


class StepTooSmallError(RinglinkError):
    """Finite-difference step hit cancellation; estimates are unreliable."""


class AliasError(RinglinkError):
    """Two-tone intermod products would alias onto the extraction bins."""


class NotInSmallSignalError(RinglinkError):
    """Power-sweep slopes are outside the small-signal windows.

    Carries the suggested reduced stimulus amplitude when one is known.
    """

    def __init__(self, msg, suggested_v_amp=None):
        super().__init__(msg)
        self.suggested_v_amp = suggested_v_amp


class InfeasibleError(RinglinkError):
    """No point in the search region satisfies the optimization constraints."""


class ConfigError(RinglinkError):
    """Configuration file is malformed or violates the schema."""
