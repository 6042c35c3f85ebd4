"""Exception hierarchy shared across the library."""


class NdtraceError(Exception):
    """Base class for all library-specific failures."""


class SpectralPointError(NdtraceError):
    """Spectral parameter is on (or numerically too close to) the essential
    spectrum, so that some characteristic root has vanishing real part."""


class InvalidPreset(NdtraceError):
    """Unknown coefficient preset name or invalid preset parameters."""


class DivergentTail(NdtraceError):
    """A tail integral of the coefficients failed to converge."""


class ContractionFailure(NdtraceError):
    """The computed norm bound of the tail integral operator is >= 1; the
    anchor must be moved further out."""


class SingularSystem(NdtraceError):
    """The dense linear system of the discretized integral equation could
    not be solved."""


class IntegratorFailure(NdtraceError):
    """The adaptive ODE integrator could not meet its tolerance."""


class NoValidAnchor(NdtraceError):
    """No anchor point gives a tail integral small enough for the
    contraction margin."""


class NearSingular(NdtraceError):
    """A fundamental matrix is numerically singular (spectral parameter too
    close to an eigenvalue)."""


class UnsupportedCoefficients(NdtraceError):
    """Operation requires compactly supported coefficients."""


class NonIntegerWinding(NdtraceError):
    """A contour winding number came out too far from an integer."""


class QuadratureError(NdtraceError):
    """Numerical quadrature failed or did not converge under refinement."""


class ZStepError(NdtraceError):
    """Numerical differentiation in the spectral parameter did not
    stabilize under step halving."""


class ConfigError(NdtraceError):
    """Invalid run configuration."""
