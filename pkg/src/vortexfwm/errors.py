"""Exception hierarchy shared by every module of the package."""


class VortexError(Exception):
    """Base class for all package errors."""


class UnsupportedModeError(VortexError, ValueError):
    """Raised for radial indices other than p = 0."""


class NoRingError(VortexError, ValueError):
    """Raised when a ring quantity is requested for ell = 0."""


class UndersampledGridError(VortexError, ValueError):
    """Raised when a grid pitch violates the sampling rule."""


class GeometryMismatchError(VortexError, ValueError):
    """Raised when two grids do not share the same sampling geometry."""


class ResonanceError(VortexError, ValueError):
    """Raised for a zero detuning in the two-photon Rabi budget."""


class NumericalError(VortexError, RuntimeError):
    """Base class for failures of a numerical procedure (CLI exit code 3)."""


class ApertureOverflowError(NumericalError):
    """Raised when a propagated beam would leave the grid aperture."""


class QuadratureError(NumericalError):
    """Raised when an adaptive quadrature fails to reach its tolerance."""


class LowContrastError(NumericalError):
    """Raised when a fringe pattern has no minimum above the prominence threshold."""


class FitError(NumericalError):
    """Raised when a least-squares fit does not converge.

    The best parameters reached are kept on ``best`` so callers can inspect them.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RankError(VortexError, ValueError):
    """Raised when fit data cannot determine all model parameters."""
