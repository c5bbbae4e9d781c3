"""Exception types shared across the package."""


class MirrorqedError(Exception):
    """Base class for all package errors."""


class TransmonRegimeError(MirrorqedError):
    """E_J/E_C too small for the asymptotic transmon level formula."""


class DimensionMismatch(MirrorqedError):
    """Operators or models with inconsistent Hilbert-space dimensions."""


class DegenerateSteadyState(MirrorqedError):
    """The Liouvillian has more than one stationary state."""


class ResolventSingular(MirrorqedError):
    """(L + i delta) could not be inverted reliably."""


class LinearityViolation(MirrorqedError):
    """Probe amplitude too strong for the linear-response regime."""


class ConvergenceFailure(MirrorqedError):
    """An iterative or long-time computation failed to settle."""
