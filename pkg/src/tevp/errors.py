"""Exception hierarchy for the tevp package."""


class TevpError(Exception):
    """Base class for all package-specific failures."""


class QuadratureFailure(TevpError):
    """Adaptive quadrature could not reach the requested tolerance."""


class DerivativeUnavailable(TevpError):
    """Profile representation cannot supply a derivative of the requested order."""


class MassOutOfRange(TevpError):
    """Requested cumulative optical mass is outside (0, a]."""


class StepUnderflow(TevpError):
    """ODE step controller failed; pathological profile or extreme k."""


class NoConvergence(TevpError):
    """Picard iteration for the transformation kernel stalled."""


class ContourTooClose(TevpError):
    """Contour integral defect stayed above 0.25 after perturbation attempts."""


class NewtonStall(TevpError):
    """Newton refinement failed to reach the residual tolerance."""


class DegenerateCharacteristic(TevpError):
    """d(k) is numerically identically zero (identical interior/exterior spectra)."""


class IterationDiverged(TevpError):
    """Fixed-point iteration for z - lambda*log z = w did not contract."""


class CaseMismatch(TevpError):
    """Asymptotic regime tag inconsistent with the travel time."""


class RegimeError(TevpError):
    """Operation requires a different travel-time regime."""
