"""Exception types shared across the package."""


class PhivarError(Exception):
    """Base class for all package-specific errors."""


class DegenerateFrame(PhivarError):
    """Chart jacobian is rank deficient at the requested parameter point."""


class NotHypersurface(PhivarError):
    """Operation requires codimension one."""


class ConfigError(PhivarError):
    """Malformed configuration file or unknown keys."""


class RepresentationUnsupported(PhivarError):
    """Map representation cannot support the requested operation."""


class NonConvergence(PhivarError):
    """Iterative search exhausted its budget without meeting tolerance."""


class GeodesicIntegrationFailure(PhivarError):
    """Geodesic integrator left the manifold beyond recoverable tolerance."""


class NotPhiHarmonic(PhivarError):
    """Map fails the tension-field residual test required by the formula."""


class NoDescentDirection(PhivarError):
    """No coordinate flow produces a negative second derivative."""


class StalledDecay(PhivarError):
    """Backtracking line search could not decrease the energy."""


class StepUnderflow(PhivarError):
    """Descent step shrank below machine-practical size."""


class ProjectionDivergence(PhivarError):
    """Closest-point projection failed to converge."""


class DimensionTooSmall(PhivarError):
    """Criterion hypothesis requires a larger dimension."""
